#include "klr/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace klr {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Whitespace tokenizer over one line.
std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::int64_t line, const char* what) {
  T value{};
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ParseError(std::string("invalid ") + what + " '" + std::string(token) + "'", line);
  return value;
}

bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::int64_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty input, expected %%MatrixMarket banner", 1);
  ++lineno;
  const auto banner = split(line);
  if (banner.empty() || banner[0] != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
  if (banner.size() != 5) throw ParseError("banner must have 5 fields", lineno);
  const std::string object = lowercase(std::string(banner[1]));
  const std::string format = lowercase(std::string(banner[2]));
  const std::string field = lowercase(std::string(banner[3]));
  const std::string symmetry = lowercase(std::string(banner[4]));
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", lineno);
  if (format != "coordinate" && format != "array") throw ParseError("unsupported format '" + format + "'", lineno);
  if (field != "real") throw ParseError("unsupported field '" + field + "' (only real is accepted)", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool symmetric = symmetry == "symmetric";
  const bool coordinate = format == "coordinate";

  // Size line.
  std::vector<std::string_view> tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    tokens = split(line);
    break;
  }
  if (tokens.empty()) throw ParseError("missing size line", lineno);
  if (tokens.size() != (coordinate ? 3U : 2U)) throw ParseError("malformed size line", lineno);
  const auto rows = parse_number<std::int64_t>(tokens[0], lineno, "row count");
  const auto cols = parse_number<std::int64_t>(tokens[1], lineno, "column count");
  if (rows <= 0 || cols <= 0) throw ParseError("matrix dimensions must be positive", lineno);
  if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", lineno);
  const std::int64_t expected =
      coordinate ? parse_number<std::int64_t>(tokens[2], lineno, "entry count")
                 : (symmetric ? rows * (rows + 1) / 2 : rows * cols);
  if (expected < 0) throw ParseError("entry count must be non-negative", lineno);

  Matrix a = Matrix::Zero(rows, cols);
  std::int64_t seen = 0;
  // Array format walks columns top to bottom; symmetric arrays store the lower triangle.
  std::int64_t next_row = 0;
  std::int64_t next_col = 0;

  while (seen < expected && std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    tokens = split(line);
    if (coordinate) {
      if (tokens.size() != 3) throw ParseError("coordinate entry needs 'row col value'", lineno);
      const auto i = parse_number<std::int64_t>(tokens[0], lineno, "row index");
      const auto j = parse_number<std::int64_t>(tokens[1], lineno, "column index");
      const auto v = parse_number<double>(tokens[2], lineno, "value");
      if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("entry index out of range", lineno);
      if (symmetric && i < j) throw ParseError("symmetric entries must lie in the lower triangle", lineno);
      a(i - 1, j - 1) += v;
      if (symmetric && i != j) a(j - 1, i - 1) += v;
    } else {
      if (tokens.size() != 1) throw ParseError("array entry needs exactly one value", lineno);
      const auto v = parse_number<double>(tokens[0], lineno, "value");
      a(next_row, next_col) = v;
      if (symmetric) a(next_col, next_row) = v;
      ++next_row;
      if (next_row == rows) {
        ++next_col;
        next_row = symmetric ? next_col : 0;
      }
    }
    ++seen;
  }
  if (seen != expected)
    throw ParseError("expected " + std::to_string(expected) + " entries, found " + std::to_string(seen), lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank_or_comment(line)) throw ParseError("unexpected data after the last entry", lineno);
  }
  return a;
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return read_matrix_market(in);
}

}  // namespace klr
