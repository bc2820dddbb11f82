#include "owrc/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace owrc::io {

FormatError::FormatError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        return buf;
    }
    return std::string(buf, ptr);
}

namespace {

std::string format_17(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

bool parse_double(std::string_view text, double& out) {
    // strtod accepts "inf"/"nan" and hex floats; both are fine for round trips.
    std::string tmp(text);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

// ---------------------------------------------------------------------------
// Problem files: a TOML subset of `key = value` lines where a value is a
// number, a double-quoted string, or a (possibly nested, multi-line) array.

struct Value;
using Array = std::vector<Value>;
struct Value {
    std::variant<double, std::string, Array> data;
    std::size_t line = 0;
    bool is_integer = false;
};

class ProblemLexer {
public:
    ProblemLexer(const std::string& text, const std::string& source) : text_(text), source_(source) {}

    std::map<std::string, Value> parse() {
        std::map<std::string, Value> entries;
        while (true) {
            skip_blank(true);
            if (pos_ >= text_.size()) break;
            const std::size_t key_line = line_;
            const std::string key = parse_key();
            skip_blank(false);
            if (!consume('=')) fail("expected '=' after key '" + key + "'");
            skip_blank(false);
            Value v = parse_value();
            v.line = key_line;
            skip_blank(false);
            if (pos_ < text_.size() && text_[pos_] != '\n') fail("unexpected text after value of '" + key + "'");
            if (!entries.emplace(key, std::move(v)).second) {
                throw FormatError(source_, key_line, "duplicate key '" + key + "'");
            }
        }
        return entries;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw FormatError(source_, line_, message); }

    void skip_blank(bool newlines) {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n' && newlines) {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else {
                return;
            }
        }
    }

    bool consume(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string parse_key() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected a key");
        return text_.substr(start, pos_ - start);
    }

    Value parse_value() {
        if (pos_ >= text_.size()) fail("missing value");
        const char c = text_[pos_];
        Value v;
        v.line = line_;
        if (c == '"') {
            v.data = parse_string();
        } else if (c == '[') {
            ++pos_;
            Array items;
            while (true) {
                skip_blank(true);
                if (consume(']')) break;
                items.push_back(parse_value());
                skip_blank(true);
                if (consume(',')) continue;
                skip_blank(true);
                if (consume(']')) break;
                fail("expected ',' or ']' in array");
            }
            v.data = std::move(items);
        } else {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+' ||
                                           text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string token = text_.substr(start, pos_ - start);
            double d = 0.0;
            if (token.empty() || !parse_double(token, d) || !std::isfinite(d)) {
                fail("malformed number '" + token + "'");
            }
            v.data = d;
            v.is_integer = token.find_first_of(".eE") == std::string::npos;
        }
        return v;
    }

    std::string parse_string() {
        ++pos_;  // opening quote
        std::string out;
        while (true) {
            if (pos_ >= text_.size() || text_[pos_] == '\n') fail("unterminated string");
            const char c = text_[pos_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos_ >= text_.size()) fail("unterminated string");
                const char e = text_[pos_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail(std::string("unsupported escape '\\") + e + "'");
                }
            } else {
                out += c;
            }
        }
    }

    const std::string& text_;
    const std::string& source_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

class ProblemReader {
public:
    ProblemReader(std::map<std::string, Value> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    ProblemFile read() {
        ProblemFile f;
        f.name = optional_string("name").value_or("");
        f.description = optional_string("description").value_or("");
        f.n = count("n", true);
        f.m = count("m", true);
        f.k = entries_.count("k") ? count("k", false) : 0;

        const Value& scen = require("scenarios");
        const Array& rows = as_array(scen, "scenarios");
        if (rows.empty()) throw FormatError(source_, scen.line, "scenarios must list at least one scenario");
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Vector row = numbers(rows[r], "scenario " + std::to_string(r + 1));
            if (static_cast<std::size_t>(row.size()) != f.k) {
                throw FormatError(source_, rows[r].line,
                                  "scenario " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                      " entries, expected k = " + std::to_string(f.k));
            }
            f.scenarios.push_back(std::move(row));
        }

        const Value& objs = require("objectives");
        const Array& list = as_array(objs, "objectives");
        if (list.size() != f.m) {
            throw FormatError(source_, objs.line,
                              "objectives lists " + std::to_string(list.size()) + " expressions, expected m = " +
                                  std::to_string(f.m));
        }
        for (const auto& item : list) {
            const auto* s = std::get_if<std::string>(&item.data);
            if (!s) throw FormatError(source_, item.line, "objectives must be strings");
            f.objectives.push_back(*s);
        }
        if (entries_.count("gamma")) f.gamma = positive("gamma");
        if (entries_.count("mu")) f.mu = positive("mu");
        if (entries_.count("known_solution")) {
            const Value& v = require("known_solution");
            Vector x = numbers(v, "known_solution");
            if (static_cast<std::size_t>(x.size()) != f.n) {
                throw FormatError(source_, v.line, "known_solution must have n entries");
            }
            f.known_solution = std::move(x);
        }
        for (const auto& [key, value] : entries_) {
            if (!used_.count(key)) throw FormatError(source_, value.line, "unknown key '" + key + "'");
        }
        return f;
    }

private:
    const Value& require(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw FormatError(source_, 1, "missing required key '" + key + "'");
        used_.insert({key, true});
        return it->second;
    }

    std::optional<std::string> optional_string(const std::string& key) {
        if (!entries_.count(key)) return std::nullopt;
        const Value& v = require(key);
        const auto* s = std::get_if<std::string>(&v.data);
        if (!s) throw FormatError(source_, v.line, "'" + key + "' must be a string");
        return *s;
    }

    std::size_t count(const std::string& key, bool positive_required) {
        const Value& v = require(key);
        const auto* d = std::get_if<double>(&v.data);
        if (!d || !v.is_integer || *d < (positive_required ? 1.0 : 0.0)) {
            throw FormatError(source_, v.line,
                              "'" + key + "' must be an integer " + (positive_required ? ">= 1" : ">= 0"));
        }
        return static_cast<std::size_t>(*d);
    }

    double positive(const std::string& key) {
        const Value& v = require(key);
        const auto* d = std::get_if<double>(&v.data);
        if (!d || !(*d > 0.0)) throw FormatError(source_, v.line, "'" + key + "' must be a positive number");
        return *d;
    }

    const Array& as_array(const Value& v, const std::string& what) {
        const auto* a = std::get_if<Array>(&v.data);
        if (!a) throw FormatError(source_, v.line, what + " must be an array");
        return *a;
    }

    Vector numbers(const Value& v, const std::string& what) {
        const Array& a = as_array(v, what);
        Vector out(static_cast<Eigen::Index>(a.size()));
        for (std::size_t c = 0; c < a.size(); ++c) {
            const auto* d = std::get_if<double>(&a[c].data);
            if (!d) throw FormatError(source_, a[c].line, what + " must contain only numbers");
            out(static_cast<Eigen::Index>(c)) = *d;
        }
        return out;
    }

    std::map<std::string, Value> entries_;
    std::map<std::string, bool> used_;
    std::string source_;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string vector_text(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v(i));
    }
    return out + "]";
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ProblemFile parse_problem_file(const std::string& text, const std::string& source) {
    ProblemLexer lexer(text, source);
    return ProblemReader(lexer.parse(), source).read();
}

ProblemFile read_problem_file(const std::string& path) {
    ProblemFile f = parse_problem_file(read_all(path), path);
    if (f.name.empty()) {
        auto slash = path.find_last_of('/');
        std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
        f.name = stem.substr(0, stem.find('.'));
    }
    return f;
}

std::string format_problem_file(const ProblemFile& f) {
    std::ostringstream out;
    if (!f.name.empty()) out << "name = " << quote(f.name) << "\n";
    if (!f.description.empty()) out << "description = " << quote(f.description) << "\n";
    out << "n = " << f.n << "\nm = " << f.m << "\nk = " << f.k << "\n";
    out << "scenarios = [\n";
    for (const auto& s : f.scenarios) out << "  " << vector_text(s) << ",\n";
    out << "]\nobjectives = [\n";
    for (const auto& o : f.objectives) out << "  " << quote(o) << ",\n";
    out << "]\n";
    if (f.gamma) out << "gamma = " << format_double(*f.gamma) << "\n";
    if (f.mu) out << "mu = " << format_double(*f.mu) << "\n";
    if (f.known_solution) out << "known_solution = " << vector_text(*f.known_solution) << "\n";
    return out.str();
}

ProblemInstance build_problem(const ProblemFile& f) {
    std::vector<expr::Program> programs;
    for (std::size_t j = 0; j < f.objectives.size(); ++j) {
        try {
            programs.push_back(expr::parse(f.objectives[j], f.n, f.k));
        } catch (const expr::SyntaxError& e) {
            throw std::invalid_argument("objective " + std::to_string(j + 1) + ": " + e.what());
        }
    }
    ProblemInstance problem = expr::make_expression_problem(f.name.empty() ? "problem" : f.name, f.n,
                                                            ScenarioSet(f.scenarios), std::move(programs));
    problem.set_description(f.description);
    if (f.gamma) problem.set_smoothness_constant(*f.gamma);
    if (f.mu) problem.set_strong_convexity_modulus(*f.mu);
    if (f.known_solution) problem.set_known_solution(*f.known_solution);
    return problem;
}

// ---------------------------------------------------------------------------
// Trace files: '#'-prefixed `key = value` metadata, one CSV header row, then
// one row per record.

void write_trace(std::ostream& out, const SolverTrace& trace) {
    if (trace.records.empty()) {
        throw std::invalid_argument("cannot write an empty trace");
    }
    const auto n = trace.records.front().x.size();
    const auto m = trace.records.front().phi.size();
    const SolverConfig& c = trace.config;
    std::string message = trace.message;
    for (char& ch : message) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    out << "# owrc trace v1\n";
    out << "# problem = " << trace.problem_name << "\n";
    out << "# n = " << n << "\n";
    out << "# m = " << m << "\n";
    out << "# step_mode = " << to_string(c.step_mode) << "\n";
    out << "# alpha = " << format_17(c.constant_alpha) << "\n";
    out << "# beta = " << format_17(c.beta) << "\n";
    out << "# epsilon = " << format_17(c.epsilon) << "\n";
    out << "# max_iterations = " << c.max_iterations << "\n";
    out << "# max_halvings = " << c.max_halvings << "\n";
    out << "# subproblem_tol = " << format_17(c.subproblem_tol) << "\n";
    out << "# active_tolerance = " << (c.active_tolerance ? format_17(*c.active_tolerance) : "relative") << "\n";
    out << "# termination = " << to_string(trace.termination) << "\n";
    out << "# message = " << message << "\n";

    out << "k";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
    for (Eigen::Index j = 0; j < m; ++j) out << ",phi" << j + 1;
    out << ",theta,t_norm,alpha,ls_trials";
    for (Eigen::Index i = 0; i < n; ++i) out << ",t" << i + 1;
    out << "\n";
    for (const auto& r : trace.records) {
        out << r.k;
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_17(r.x(i));
        for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_17(r.phi(j));
        out << ',' << format_17(r.theta) << ',' << format_17(r.direction_norm) << ',' << format_17(r.alpha) << ','
            << r.line_search_trials;
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_17(r.direction(i));
        out << "\n";
    }
}

SolverTrace read_trace(std::istream& in, const std::string& source) {
    SolverTrace trace;
    std::map<std::string, std::string> meta;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t n = 0;
    std::size_t m = 0;

    auto fail = [&](const std::string& msg) { throw FormatError(source, line_no, msg); };
    auto number = [&](const std::string& text) {
        double d = 0.0;
        if (!parse_double(text, d)) fail("malformed number '" + text + "'");
        return d;
    };
    auto integer = [&](const std::string& text) {
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) fail("malformed integer '" + text + "'");
        return v;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find(" = ");
            if (eq != std::string::npos) {
                meta[line.substr(2, eq - 2)] = line.substr(eq + 3);
            }
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);

        if (!header_seen) {
            if (!meta.count("n") || !meta.count("m")) fail("trace metadata must declare n and m");
            n = integer(meta["n"]);
            m = integer(meta["m"]);
            if (cells.size() != 2 * n + m + 5 || cells[0] != "k") fail("unexpected trace header");
            header_seen = true;
            continue;
        }
        if (cells.size() != 2 * n + m + 5) fail("row has " + std::to_string(cells.size()) + " columns");
        IterationRecord r;
        std::size_t c = 0;
        r.k = integer(cells[c++]);
        r.x.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) r.x(static_cast<Eigen::Index>(i)) = number(cells[c++]);
        r.phi.resize(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) r.phi(static_cast<Eigen::Index>(j)) = number(cells[c++]);
        r.theta = number(cells[c++]);
        r.direction_norm = number(cells[c++]);
        r.alpha = number(cells[c++]);
        r.line_search_trials = static_cast<int>(integer(cells[c++]));
        r.direction.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) r.direction(static_cast<Eigen::Index>(i)) = number(cells[c++]);
        trace.records.push_back(std::move(r));
    }
    if (!header_seen) fail("trace has no header row");
    if (trace.records.empty()) fail("trace has no records");

    try {
        trace.problem_name = meta["problem"];
        SolverConfig& cfg = trace.config;
        cfg.step_mode = step_mode_from_string(meta.at("step_mode"));
        cfg.constant_alpha = number(meta.at("alpha"));
        cfg.beta = number(meta.at("beta"));
        cfg.epsilon = number(meta.at("epsilon"));
        cfg.max_iterations = integer(meta.at("max_iterations"));
        cfg.max_halvings = static_cast<int>(integer(meta.at("max_halvings")));
        cfg.subproblem_tol = number(meta.at("subproblem_tol"));
        const std::string& act = meta.at("active_tolerance");
        if (act != "relative") cfg.active_tolerance = number(act);
        trace.termination = termination_from_string(meta.at("termination"));
        trace.message = meta["message"];
    } catch (const std::out_of_range&) {
        throw FormatError(source, 0, "trace metadata is incomplete");
    } catch (const std::invalid_argument& e) {
        throw FormatError(source, 0, e.what());
    }
    trace.final_x = trace.records.back().x;
    return trace;
}

void write_trace_file(const std::string& path, const SolverTrace& trace) {
    std::ofstream out(path);
    if (!out) throw FormatError(path, 0, "cannot open file for writing");
    write_trace(out, trace);
}

SolverTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path, 0, "cannot open file");
    return read_trace(in, path);
}

void write_plot_data(std::ostream& out, const SolverTrace& trace, const std::optional<Vector>& solution) {
    out << "k";
    if (solution) out << ",log10_dist";
    out << ",log10_abs_theta";
    const auto m = trace.records.empty() ? 0 : trace.records.front().phi.size();
    for (Eigen::Index j = 0; j < m; ++j) out << ",phi" << j + 1;
    out << "\n";
    for (const auto& r : trace.records) {
        out << r.k;
        if (solution) out << ',' << format_17(std::log10((r.x - *solution).norm()));
        out << ',' << format_17(std::log10(std::abs(r.theta)));
        for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_17(r.phi(j));
        out << "\n";
    }
}

}  // namespace owrc::io
