#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pctnpi {

using cplx = std::complex<double>;

/// Named tensor leg. Two legs are contractible iff name and dim both match.
struct IndexLabel {
  std::string name;
  std::size_t dim = 1;

  friend bool operator==(const IndexLabel&, const IndexLabel&) = default;
};

/// Cost accounting for a contraction session.
///
/// multiply_adds grows by the product of the dims of every distinct index
/// taking part in a pairwise contraction (free legs of both operands plus
/// the shared legs, each counted once). peak_elements tracks the largest
/// materialized contraction result.
struct OpCounter {
  std::uint64_t multiply_adds = 0;
  std::uint64_t peak_elements = 0;

  void record(std::uint64_t mads, std::uint64_t result_elements) noexcept {
    multiply_adds += mads;
    if (result_elements > peak_elements) peak_elements = result_elements;
  }
};

std::size_t element_count(std::span<const IndexLabel> indices);

/// Dense complex tensor with named legs, stored row-major over the leg list.
///
/// Values are fixed at construction; only leg names may change afterwards
/// (renaming touches metadata, never data).
class LabeledTensor {
 public:
  /// Rank-0 tensor holding 0.
  LabeledTensor();
  LabeledTensor(std::vector<IndexLabel> indices, std::vector<cplx> data);

  static LabeledTensor zeros(std::vector<IndexLabel> indices);
  static LabeledTensor scalar(cplx value);

  /// Fills every entry with f(position), position being one coordinate per leg.
  template <class F>
  static LabeledTensor generate(std::vector<IndexLabel> indices, F&& f);

  std::span<const IndexLabel> indices() const noexcept { return indices_; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::size_t rank() const noexcept { return indices_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::optional<std::size_t> position(std::string_view name) const noexcept;
  bool has(std::string_view name) const noexcept { return position(name).has_value(); }
  const IndexLabel& index(std::string_view name) const;

  /// Row-major strides, one per leg.
  std::vector<std::size_t> strides() const;

  cplx at(std::span<const std::size_t> pos) const;
  cplx at(std::initializer_list<std::size_t> pos) const {
    return at(std::span<const std::size_t>(pos.begin(), pos.size()));
  }
  /// Value of a rank-0 tensor.
  cplx value() const;

  LabeledTensor renamed(std::string_view from, std::string to) const&;
  LabeledTensor renamed(std::string_view from, std::string to) &&;

  /// Same tensor with legs reordered to `order` (which must name every leg once).
  LabeledTensor permuted(std::span<const std::string> order) const;

 private:
  void check_layout() const;

  std::vector<IndexLabel> indices_;
  std::vector<cplx> data_;
};

/// Contracts every shared leg name of a and b.
///
/// The result carries a's free legs (in a's order) followed by b's free legs
/// (in b's order). `threads` splits the output rows; every output element is
/// always reduced in the same order, so results do not depend on it.
/// Throws DimensionMismatch when a shared name has different dims.
LabeledTensor contract(const LabeledTensor& a, const LabeledTensor& b, OpCounter& counter,
                       unsigned threads = 1);

/// Fixes leg `name` at `position` and drops it. Throws IndexError.
LabeledTensor slice(const LabeledTensor& t, std::string_view name, std::size_t position);

/// Appends leg `target` with entry(..., s, ..., n) = t(..., s, ...) if
/// projector[s] == n and 0 otherwise. The source leg is kept.
///
/// An identity projector duplicates the leg; a many-to-one projector
/// (forward-backward pair -> difference value) projects it.
LabeledTensor delta_join(const LabeledTensor& t, std::string_view source, IndexLabel target,
                         std::span<const std::size_t> projector);

template <class F>
LabeledTensor LabeledTensor::generate(std::vector<IndexLabel> indices, F&& f) {
  const std::size_t n = element_count(indices);
  std::vector<cplx> data(n);
  std::vector<std::size_t> pos(indices.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = f(std::span<const std::size_t>(pos));
    for (std::size_t d = indices.size(); d-- > 0;) {
      if (++pos[d] < indices[d].dim) break;
      pos[d] = 0;
    }
  }
  return LabeledTensor(std::move(indices), std::move(data));
}

}  // namespace pctnpi
