#include "a2ws/check.hpp"

#include <sstream>

namespace a2ws::detail {

void contract_failure(const char* expr, const char* file, int line,
                      const std::string& msg) {
  std::ostringstream out;
  out << "contract violated: " << expr << " at " << file << ":" << line;
  if (!msg.empty()) out << " (" << msg << ")";
  throw ContractError(out.str());
}

}  // namespace a2ws::detail
