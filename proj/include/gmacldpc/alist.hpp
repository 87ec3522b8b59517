#pragma once

#include <string>
#include <string_view>

#include "gmacldpc/code.hpp"

namespace gmacldpc {

// MacKay alist text format: "n m", max column/row weights, the weight lists,
// then 1-based check lists per variable and variable lists per check. Rows
// shorter than the maximum weight are padded with zeros on write; zeros are
// ignored on read.

std::string to_alist(const ParityCheckMatrix& H);
ParityCheckMatrix parse_alist(std::string_view text);

ParityCheckMatrix load_alist(const std::string& path);
void save_alist(const ParityCheckMatrix& H, const std::string& path);

}  // namespace gmacldpc
