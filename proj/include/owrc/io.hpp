#pragma once

#include "owrc/expr.hpp"
#include "owrc/problem.hpp"
#include "owrc/solver.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace owrc::io {

/// Input error with file/line context.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Declarative problem description. See docs/formats.md.
struct ProblemFile {
    std::string name;
    std::string description;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::vector<Vector> scenarios;
    std::vector<std::string> objectives;
    std::optional<double> gamma;
    std::optional<double> mu;
    std::optional<Vector> known_solution;
};

ProblemFile parse_problem_file(const std::string& text, const std::string& source = "<string>");
ProblemFile read_problem_file(const std::string& path);
std::string format_problem_file(const ProblemFile& file);

/// Compiles every expression; errors name the offending objective (1-based).
ProblemInstance build_problem(const ProblemFile& file);

/// Shortest decimal text that reads back to exactly `value` (at most 17 digits).
std::string format_double(double value);

void write_trace(std::ostream& out, const SolverTrace& trace);
SolverTrace read_trace(std::istream& in, const std::string& source = "<stream>");
void write_trace_file(const std::string& path, const SolverTrace& trace);
SolverTrace read_trace_file(const std::string& path);

/// Plot-ready columns: k, log10 |x^k - x*| (when x* known), log10 |Theta|, Phi_j.
void write_plot_data(std::ostream& out, const SolverTrace& trace,
                     const std::optional<Vector>& solution);

}  // namespace owrc::io
