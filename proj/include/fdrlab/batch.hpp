#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fdrlab {

enum class Label : unsigned char { Null = 0, Alternative = 1 };

// An ordered collection of p-values in [0,1], optionally carrying
// ground-truth null/alternative labels of equal length.
struct PValueBatch {
    std::vector<double> values;
    std::vector<Label> labels;  // empty when truth is unknown

    std::size_t size() const { return values.size(); }
    bool has_labels() const { return !labels.empty(); }

    std::size_t null_count() const {
        std::size_t n = 0;
        for (Label l : labels)
            if (l == Label::Null) ++n;
        return n;
    }

    void validate() const {
        for (double v : values)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("p-value outside [0,1]");
        if (!labels.empty() && labels.size() != values.size())
            throw std::invalid_argument("label count does not match value count");
    }
};

}  // namespace fdrlab
