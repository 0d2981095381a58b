#ifndef EPD_TOOLS_CLI_HPP
#define EPD_TOOLS_CLI_HPP

#include <ostream>

namespace epd::cli {

// Exit codes: 0 success, 2 input validation, 3 internal invariant violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInternal = 3;

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epd::cli

#endif  // EPD_TOOLS_CLI_HPP
