#pragma once

#include <stdexcept>
#include <string>

namespace a2ws {

// Misuse of a window, lock, deque or ring operation. These indicate bugs in
// calling code rather than runtime conditions, hence logic_error.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
[[noreturn]] void contract_failure(const char* expr, const char* file, int line,
                                   const std::string& msg);
}  // namespace detail

}  // namespace a2ws

#define A2WS_CHECK(expr)                                                     \
  do {                                                                       \
    if (!(expr)) [[unlikely]]                                                \
      ::a2ws::detail::contract_failure(#expr, __FILE__, __LINE__, {});       \
  } while (0)

#define A2WS_CHECK_MSG(expr, msg)                                            \
  do {                                                                       \
    if (!(expr)) [[unlikely]]                                                \
      ::a2ws::detail::contract_failure(#expr, __FILE__, __LINE__, (msg));    \
  } while (0)
