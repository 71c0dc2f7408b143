#pragma once
#include <string>

namespace blowup {

// 17 significant digits, enough to round-trip a double.
std::string fmt17(double v);

}  // namespace blowup
