#include "abm/kernels.hpp"

namespace abm::kernels {
const Ops* avx2() { return nullptr; }
}  // namespace abm::kernels
