#include "hsilab/envs/model_io.hpp"

#include "hsilab/core/errors.hpp"
#include "hsilab/core/numfmt.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace hsilab::envs {

namespace {

void write_rows(std::ostringstream& out, const std::vector<double>& flat, std::size_t width) {
    for (std::size_t k = 0; k < flat.size(); ++k) {
        out << format_exact(flat[k]);
        out << ((k + 1) % width == 0 ? '\n' : ' ');
    }
}

using Key = std::vector<std::size_t>;

struct Pending {
    std::size_t line = 0;
    std::map<std::string, std::pair<std::string, std::size_t>> header;
    std::map<std::string, std::map<Key, std::pair<std::vector<double>, std::size_t>>> blocks;
};

struct SectionHead {
    std::string name;
    std::map<std::string, std::size_t> args;
};

SectionHead parse_head(std::string_view s, std::size_t line) {
    s = trim(s.substr(1, s.size() - 2));
    SectionHead head;
    std::size_t pos = 0;
    bool first = true;
    while (pos < s.size()) {
        const auto end = std::min(s.find(' ', pos), s.size());
        const auto tok = s.substr(pos, end - pos);
        pos = end + 1;
        if (tok.empty()) continue;
        if (first) {
            head.name = std::string(tok);
            first = false;
            continue;
        }
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("section argument '" + std::string(tok) + "' lacks '='", line);
        try {
            head.args[std::string(tok.substr(0, eq))] = parse_count(tok.substr(eq + 1));
        } catch (const ParameterError& e) {
            throw ConfigError(e.what(), line);
        }
    }
    return head;
}

Key section_key(const SectionHead& head, std::initializer_list<const char*> names, std::size_t line) {
    if (head.args.size() != names.size())
        throw ConfigError("section [" + head.name + "] has wrong arguments", line);
    Key key;
    for (const char* n : names) {
        const auto it = head.args.find(n);
        if (it == head.args.end())
            throw ConfigError("section [" + head.name + "] needs argument " + n, line);
        key.push_back(it->second);
    }
    return key;
}

const std::string& header_value(const Pending& p, const std::string& key) {
    const auto it = p.header.find(key);
    if (it == p.header.end()) throw ConfigError("model header lacks '" + key + "'", p.line);
    return it->second.first;
}

std::size_t header_count(const Pending& p, const std::string& key) {
    try {
        return parse_count(header_value(p, key));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what(), p.header.at(key).second);
    }
}

const std::vector<double>& block(const Pending& p, const std::string& kind, const Key& key,
                                 std::size_t expected) {
    const auto kit = p.blocks.find(kind);
    std::ostringstream label;
    label << '[' << kind;
    for (std::size_t k : key) label << ' ' << k;
    label << ']';
    if (kit == p.blocks.end() || !kit->second.contains(key))
        throw ConfigError("model '" + header_value(p, "name") + "' is missing section " + label.str(),
                          p.line);
    const auto& [values, line] = kit->second.at(key);
    if (values.size() != expected)
        throw ConfigError("section " + label.str() + " has " + std::to_string(values.size()) +
                              " numbers, expected " + std::to_string(expected),
                          line);
    return values;
}

EnvModel finish(const Pending& p) {
    Dims dims;
    try {
        dims = Dims::make(header_count(p, "d"), header_count(p, "alphabet"), header_count(p, "d_query"),
                          header_count(p, "horizon"), header_count(p, "actions"));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what(), p.line);
    }
    if (dims.state_count() > kMaxSerializedStates)
        throw ConfigError("model has too many states for the text format", p.line);
    ClassTag tag;
    try {
        tag = parse_class_tag(header_value(p, "class"));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what(), p.line);
    }
    const std::string& form = header_value(p, "form");
    if (form != "product" && form != "joint") throw ConfigError("form must be product or joint", p.line);
    const std::size_t O = header_count(p, "observations");

    EnvModel m = make_blank_model(header_value(p, "name"), dims, tag);
    const std::size_t S = dims.state_count();
    const std::size_t A = dims.actions;
    const std::size_t n = dims.alphabet;
    m.initial = block(p, "initial", {}, S);

    if (form == "product") {
        ProductKernel pk(dims.horizon - 1, dims.d, n, A);
        for (std::size_t h = 1; h < dims.horizon; ++h)
            for (std::size_t i = 0; i < dims.d; ++i)
                for (std::size_t a = 0; a < A; ++a) {
                    const auto& rows = block(p, "factor", {h, i, a}, n * n);
                    for (SubValue v = 0; v < n; ++v)
                        for (SubValue w = 0; w < n; ++w) pk.at(h, i, v, a, w) = rows[v * n + w];
                }
        m.transitions = pk.expand(dims);
        m.product = std::move(pk);
    } else {
        std::vector<const std::vector<double>*> dense;
        for (std::size_t h = 1; h < dims.horizon; ++h)
            for (std::size_t a = 0; a < A; ++a) dense.push_back(&block(p, "transition", {h, a}, S * S));
        m.transitions = TransitionTable::from_function(
            dims.horizon - 1, S, A,
            [&](std::size_t h, std::size_t s, std::size_t a, std::vector<Transition>& out) {
                const auto& rows = *dense[(h - 1) * A + a];
                for (std::size_t t = 0; t < S; ++t)
                    if (rows[s * S + t] != 0.0) out.push_back({t, rows[s * S + t]});
            });
    }

    if (O > 0) {
        m.allocate_emissions(O);
        const std::size_t U = dims.unqueried_count();
        for (std::size_t h = 1; h <= dims.horizon; ++h)
            for (std::size_t q = 0; q < m.query_count(); ++q) {
                const auto& rows = block(p, "emission", {h, q}, O * U);
                for (std::size_t o = 0; o < O; ++o)
                    for (std::size_t u = 0; u < U; ++u) m.emission_ref(h, q, o, u) = rows[o * U + u];
            }
    }
    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        const auto& rows = block(p, "reward", {h}, S * A);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) m.reward_mean_ref(h, s, a) = rows[s * A + a];
    }
    try {
        validate_model(m);
    } catch (const ModelError& e) {
        throw ConfigError(e.what(), p.line);
    }
    return m;
}

} // namespace

std::string serialize_model(const EnvModel& m) {
    const Dims& dims = m.dims;
    const std::size_t S = dims.state_count();
    if (S > kMaxSerializedStates)
        throw SizeError("model '" + m.name + "' has too many states for the text format");
    const std::size_t A = dims.actions;
    std::ostringstream out;
    out << "[model]\n"
        << "name = " << m.name << '\n'
        << "class = " << to_string(m.tag) << '\n'
        << "d = " << dims.d << '\n'
        << "alphabet = " << dims.alphabet << '\n'
        << "d_query = " << dims.d_query << '\n'
        << "horizon = " << dims.horizon << '\n'
        << "actions = " << A << '\n'
        << "observations = " << (m.has_emissions() ? m.observations : 0) << '\n'
        << "form = " << (m.product ? "product" : "joint") << "\n\n";

    out << "[initial]\n";
    write_rows(out, m.initial, S);

    if (m.product) {
        const std::size_t n = dims.alphabet;
        for (std::size_t h = 1; h < dims.horizon; ++h)
            for (std::size_t i = 0; i < dims.d; ++i)
                for (std::size_t a = 0; a < A; ++a) {
                    out << "\n[factor h=" << h << " i=" << i << " a=" << a << "]\n";
                    std::vector<double> rows;
                    for (SubValue v = 0; v < n; ++v)
                        for (double x : m.product->row(h, i, v, a)) rows.push_back(x);
                    write_rows(out, rows, n);
                }
    } else {
        for (std::size_t h = 1; h < dims.horizon; ++h)
            for (std::size_t a = 0; a < A; ++a) {
                out << "\n[transition h=" << h << " a=" << a << "]\n";
                std::vector<double> rows(S * S, 0.0);
                for (std::size_t s = 0; s < S; ++s)
                    for (const auto& e : m.next(h, s, a)) rows[s * S + e.next] += e.prob;
                write_rows(out, rows, S);
            }
    }

    if (m.has_emissions()) {
        const std::size_t U = dims.unqueried_count();
        for (std::size_t h = 1; h <= dims.horizon; ++h)
            for (std::size_t q = 0; q < m.query_count(); ++q) {
                out << "\n[emission h=" << h << " q=" << q << "]\n";
                std::vector<double> rows;
                for (std::size_t o = 0; o < m.observations; ++o)
                    for (std::size_t u = 0; u < U; ++u) rows.push_back(m.emission(h, q, o, u));
                write_rows(out, rows, U);
            }
    }

    for (std::size_t h = 1; h <= dims.horizon; ++h) {
        out << "\n[reward h=" << h << "]\n";
        std::vector<double> rows;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) rows.push_back(m.reward_mean(h, s, a));
        write_rows(out, rows, A);
    }
    return out.str();
}

std::vector<EnvModel> parse_models(std::string_view text) {
    std::vector<Pending> pending;
    std::vector<double>* target = nullptr;
    bool in_header = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            const SectionHead head = parse_head(line, line_no);
            target = nullptr;
            in_header = false;
            if (head.name == "model") {
                if (!head.args.empty()) throw ConfigError("[model] takes no arguments", line_no);
                pending.emplace_back();
                pending.back().line = line_no;
                in_header = true;
                continue;
            }
            if (pending.empty()) throw ConfigError("section before any [model]", line_no);
            Key key;
            if (head.name == "initial") key = section_key(head, {}, line_no);
            else if (head.name == "factor") key = section_key(head, {"h", "i", "a"}, line_no);
            else if (head.name == "transition") key = section_key(head, {"h", "a"}, line_no);
            else if (head.name == "emission") key = section_key(head, {"h", "q"}, line_no);
            else if (head.name == "reward") key = section_key(head, {"h"}, line_no);
            else throw ConfigError("unknown section [" + head.name + "]", line_no);
            auto& slot = pending.back().blocks[head.name];
            if (slot.contains(key)) throw ConfigError("duplicate section [" + head.name + "]", line_no);
            target = &slot[key].first;
            slot[key].second = line_no;
            continue;
        }

        if (in_header) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
            const std::string key(trim(line.substr(0, eq)));
            if (pending.back().header.contains(key))
                throw ConfigError("duplicate key '" + key + "'", line_no);
            pending.back().header[key] = {std::string(trim(line.substr(eq + 1))), line_no};
            continue;
        }
        if (target == nullptr) throw ConfigError("data outside a section", line_no);
        std::size_t p = 0;
        while (p < line.size()) {
            const auto q = std::min(line.find_first_of(" \t", p), line.size());
            if (q > p) {
                try {
                    target->push_back(parse_number(line.substr(p, q - p)));
                } catch (const ParameterError& e) {
                    throw ConfigError(e.what(), line_no);
                }
            }
            p = q + 1;
        }
        if (end == text.size()) break;
    }

    std::vector<EnvModel> out;
    for (const auto& p : pending) out.push_back(finish(p));
    if (out.empty()) throw ConfigError("no [model] section found");
    return out;
}

EnvModel parse_model(std::string_view text) {
    auto models = parse_models(text);
    if (models.size() != 1)
        throw ConfigError("expected exactly one model, found " + std::to_string(models.size()));
    return std::move(models.front());
}

void save_model(const EnvModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write '" + path.string() + "'");
    out << serialize_model(m);
    if (!out) throw ParameterError("write to '" + path.string() + "' failed");
}

std::vector<EnvModel> load_models(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_models(buf.str());
}

} // namespace hsilab::envs
