#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace binscreen::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kUserError = 1, kInternalError = 2 };

/// Runs one subcommand (gen, screen, fit, asymptotics, table1, table2,
/// figure1). Results go to `out` unless an --out file is given; usage
/// text, errors and run manifests go to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parsed CSV: predictors in file order plus the response column.
struct CsvData {
    std::vector<std::string> names;  // predictor names
    std::vector<double> x;           // row-major n x p
    std::vector<double> y;
    std::size_t n = 0;
    std::size_t p = 0;
};

/// Reads a headed CSV. Throws std::runtime_error naming the line and column
/// of any missing, non-numeric or (for the response) non-binary cell.
CsvData read_csv(const std::string& path, const std::string& response);

/// Shortest decimal that reads back to the same double.
std::string shortest(double value);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace binscreen::cli
