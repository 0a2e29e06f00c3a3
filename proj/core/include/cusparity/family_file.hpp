#pragma once

#include "cusparity/family.hpp"

#include <filesystem>
#include <string_view>

namespace cusparity {

/// Parses the declarative family format:
///
///     # comment
///     name      = my_cusp
///     dim       = 1
///     kind      = general          # or gradient
///     rhs1      = t2 + t1*x1 - x1^3
///     potential = x1^4/4 - ...     # gradient families only
///     box_lo    = -1, -1
///     box_hi    = 1, 1
///     sz_edge   = right
///     fd_step   = 1e-5
///     builtin   = cusp1            # start from a built-in, other keys override box fields
///
/// Errors carry the 1-based line number.
FamilySpec parse_family_text(std::string_view text);
FamilySpec load_family_file(const std::filesystem::path& path);

} // namespace cusparity
