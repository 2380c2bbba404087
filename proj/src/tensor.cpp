#include "cogbridge/tensor.hpp"

#include <cmath>

namespace cogbridge {

bool all_finite(const Tensor2& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace cogbridge
