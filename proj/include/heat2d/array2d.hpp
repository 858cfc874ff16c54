#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace heat2d {

// Dense 2D array with (ix, iy) indexing, x fastest. Used for conductivity
// blocks, temperature fields, and interpolation-matrix storage.
template <class T>
class Array2D {
public:
    Array2D() = default;
    Array2D(int nx, int ny, T fill = T{})
        : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {
        assert(nx >= 0 && ny >= 0);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int ix, int iy) {
        assert(ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_);
        return data_[static_cast<std::size_t>(iy) * nx_ + ix];
    }
    const T& operator()(int ix, int iy) const {
        assert(ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_);
        return data_[static_cast<std::size_t>(iy) * nx_ + ix];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool operator==(const Array2D&) const = default;

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<T> data_;
};

} // namespace heat2d
