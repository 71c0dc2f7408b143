#include "blowuplab/format.hpp"

#include <fmt/format.h>

namespace blowup {

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace blowup
