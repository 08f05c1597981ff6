#include <cstdlib>
#include <string_view>

#include "coems/simd/kernels.hpp"

namespace coems::simd {

const KernelTable& active_kernels() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* force = std::getenv("COEMS_FORCE_SCALAR");
        if (force != nullptr && std::string_view(force) == "1") return scalar_kernels();
        if (const KernelTable* avx2 = avx2_kernels()) return *avx2;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace coems::simd
