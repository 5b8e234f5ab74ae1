#include <cstdlib>
#include <string_view>

#include "abm/common.hpp"
#include "abm/kernels.hpp"

namespace abm::kernels {

const Ops& active() {
  static const Ops& chosen = []() -> const Ops& {
    const char* env = std::getenv("ABM_KERNELS");
    if (env) {
      std::string_view want(env);
      if (want == "scalar") return scalar();
      if (want == "avx2") {
        const Ops* v = avx2();
        if (!v) throw DataError("ABM_KERNELS=avx2 requested but AVX2 is unavailable");
        return *v;
      }
      throw DataError("unknown ABM_KERNELS value: " + std::string(env));
    }
    const Ops* v = avx2();
    return v ? *v : scalar();
  }();
  return chosen;
}

}  // namespace abm::kernels
