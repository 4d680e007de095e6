#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mdv/errors.hpp"

namespace mdv {

// An i.i.d. sample with the seed that produced it, so every downstream
// artifact can be regenerated bit-identically.
struct SampleSet {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string model_tag;

    std::size_t size() const { return values.size(); }

    void validate() const {
        if (values.empty()) throw ParamError("SampleSet: empty sample");
        for (double v : values)
            if (!std::isfinite(v)) throw ParamError("SampleSet: non-finite sample value");
    }
};

}  // namespace mdv
