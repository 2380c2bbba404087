#pragma once
// Row-major dense matrix of doubles. Vectors are 1xN or Nx1 tensors.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogbridge {

// Input/validation failures caused by user-supplied files or flags.
// The CLI maps these to exit code 2; everything else is an internal error.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows*cols, row-major
    bool requires_grad = false;

    Tensor2() = default;
    Tensor2(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative shape");
    }

    static Tensor2 from(int r, int c, std::vector<double> values) {
        Tensor2 t;
        t.rows = r;
        t.cols = c;
        if (values.size() != static_cast<std::size_t>(r) * c)
            throw std::invalid_argument("Tensor2::from: size mismatch");
        t.data = std::move(values);
        return t;
    }

    std::size_t size() const { return data.size(); }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

// True if every entry is finite.
bool all_finite(const Tensor2& t);

}  // namespace cogbridge
