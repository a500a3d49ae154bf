#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace aoiopt {

/// Dense row-major 2-D array; the last index varies fastest.
template <class T>
class Array2 {
 public:
  Array2() = default;
  Array2(std::size_t n0, std::size_t n1, T fill = T{}) : dims_{n0, n1}, data_(n0 * n1, fill) {}

  T& operator()(std::size_t a, std::size_t b) { return data_[a * dims_[1] + b]; }
  const T& operator()(std::size_t a, std::size_t b) const { return data_[a * dims_[1] + b]; }

  std::size_t dim(std::size_t k) const { return dims_[k]; }
  const std::array<std::size_t, 2>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool operator==(const Array2&) const = default;

 private:
  std::array<std::size_t, 2> dims_{0, 0};
  std::vector<T> data_;
};

/// Dense row-major 3-D array; the last index varies fastest.
template <class T>
class Array3 {
 public:
  Array3() = default;
  Array3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
      : dims_{n0, n1, n2}, data_(n0 * n1 * n2, fill) {}

  std::size_t index(std::size_t a, std::size_t b, std::size_t c) const {
    return (a * dims_[1] + b) * dims_[2] + c;
  }
  T& operator()(std::size_t a, std::size_t b, std::size_t c) { return data_[index(a, b, c)]; }
  const T& operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[index(a, b, c)];
  }

  std::size_t dim(std::size_t k) const { return dims_[k]; }
  const std::array<std::size_t, 3>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool operator==(const Array3&) const = default;

 private:
  std::array<std::size_t, 3> dims_{0, 0, 0};
  std::vector<T> data_;
};

}  // namespace aoiopt
