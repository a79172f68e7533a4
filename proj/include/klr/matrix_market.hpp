#pragma once

#include <filesystem>
#include <istream>

#include "klr/types.hpp"

namespace klr {

/// Reads a real Matrix Market file ("coordinate" or "array", "general" or
/// "symmetric") into a dense matrix. Symmetric storage is mirrored. Anything
/// else (complex, pattern, integer, skew/hermitian) is a ParseError.
Matrix read_matrix_market(const std::filesystem::path& path);
Matrix read_matrix_market(std::istream& in);

}  // namespace klr
