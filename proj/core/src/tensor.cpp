#include "pctnpi/tensor.hpp"

#include <algorithm>
#include <thread>
#include <unordered_set>

#include "pctnpi/errors.hpp"

namespace pctnpi {

namespace {

// Walks a multi-index over `dims` while tracking the matching linear offset
// in a tensor with the given strides.
struct Odometer {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> strides;
  std::vector<std::size_t> pos;
  std::size_t offset = 0;

  Odometer(std::vector<std::size_t> d, std::vector<std::size_t> s)
      : dims(std::move(d)), strides(std::move(s)), pos(dims.size(), 0) {}

  void seek(std::size_t linear) {
    offset = 0;
    for (std::size_t d = dims.size(); d-- > 0;) {
      pos[d] = linear % dims[d];
      linear /= dims[d];
      offset += pos[d] * strides[d];
    }
  }

  void next() {
    for (std::size_t d = dims.size(); d-- > 0;) {
      offset += strides[d];
      if (++pos[d] < dims[d]) return;
      offset -= strides[d] * dims[d];
      pos[d] = 0;
    }
  }
};

std::vector<std::size_t> row_major_strides(std::span<const IndexLabel> indices) {
  std::vector<std::size_t> s(indices.size());
  std::size_t acc = 1;
  for (std::size_t d = indices.size(); d-- > 0;) {
    s[d] = acc;
    acc *= indices[d].dim;
  }
  return s;
}

template <class Body>
void parallel_rows(std::size_t rows, unsigned threads, Body&& body) {
  constexpr std::size_t kMinRowsPerThread = 4096;
  std::size_t workers = std::max<std::size_t>(1, threads);
  workers = std::min(workers, std::max<std::size_t>(1, rows / kMinRowsPerThread));
  if (workers <= 1) {
    body(std::size_t{0}, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = std::min(rows, w * chunk);
    const std::size_t end = std::min(rows, begin + chunk);
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(std::size_t{0}, std::min(rows, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace

std::size_t element_count(std::span<const IndexLabel> indices) {
  std::size_t n = 1;
  for (const auto& ix : indices) n *= ix.dim;
  return n;
}

LabeledTensor::LabeledTensor() : data_(1, cplx{}) {}

LabeledTensor::LabeledTensor(std::vector<IndexLabel> indices, std::vector<cplx> data)
    : indices_(std::move(indices)), data_(std::move(data)) {
  check_layout();
}

LabeledTensor LabeledTensor::zeros(std::vector<IndexLabel> indices) {
  const std::size_t n = element_count(indices);
  return LabeledTensor(std::move(indices), std::vector<cplx>(n));
}

LabeledTensor LabeledTensor::scalar(cplx value) { return LabeledTensor({}, {value}); }

void LabeledTensor::check_layout() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& ix : indices_) {
    if (ix.dim == 0) throw IndexError("index '" + ix.name + "' has dimension 0");
    if (!seen.insert(ix.name).second) throw IndexError("duplicate index name '" + ix.name + "'");
  }
  if (data_.size() != element_count(indices_)) {
    throw IndexError("data length " + std::to_string(data_.size()) +
                     " does not match the product of index dimensions");
  }
}

std::optional<std::size_t> LabeledTensor::position(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i].name == name) return i;
  }
  return std::nullopt;
}

const IndexLabel& LabeledTensor::index(std::string_view name) const {
  auto p = position(name);
  if (!p) throw IndexError("no index named '" + std::string(name) + "'");
  return indices_[*p];
}

std::vector<std::size_t> LabeledTensor::strides() const { return row_major_strides(indices_); }

cplx LabeledTensor::at(std::span<const std::size_t> pos) const {
  if (pos.size() != indices_.size()) throw IndexError("position rank does not match tensor rank");
  std::size_t off = 0;
  for (std::size_t d = 0; d < pos.size(); ++d) {
    if (pos[d] >= indices_[d].dim) throw IndexError("position out of range on '" + indices_[d].name + "'");
    off = off * indices_[d].dim + pos[d];
  }
  return data_[off];
}

cplx LabeledTensor::value() const {
  if (!indices_.empty()) throw IndexError("value() called on a tensor of rank " + std::to_string(rank()));
  return data_.front();
}

LabeledTensor LabeledTensor::renamed(std::string_view from, std::string to) const& {
  LabeledTensor copy = *this;
  return std::move(copy).renamed(from, std::move(to));
}

LabeledTensor LabeledTensor::renamed(std::string_view from, std::string to) && {
  auto p = position(from);
  if (!p) throw IndexError("no index named '" + std::string(from) + "'");
  if (to != from && has(to)) throw IndexError("index name '" + to + "' already present");
  indices_[*p].name = std::move(to);
  return std::move(*this);
}

LabeledTensor LabeledTensor::permuted(std::span<const std::string> order) const {
  if (order.size() != indices_.size()) throw IndexError("permutation must name every index once");
  const auto src_strides = strides();
  std::vector<IndexLabel> out_idx;
  std::vector<std::size_t> dims, gather;
  out_idx.reserve(order.size());
  for (const auto& name : order) {
    auto p = position(name);
    if (!p) throw IndexError("no index named '" + name + "'");
    out_idx.push_back(indices_[*p]);
    dims.push_back(indices_[*p].dim);
    gather.push_back(src_strides[*p]);
  }
  std::vector<cplx> out(data_.size());
  Odometer od(dims, gather);
  for (std::size_t i = 0; i < out.size(); ++i, od.next()) out[i] = data_[od.offset];
  return LabeledTensor(std::move(out_idx), std::move(out));
}

LabeledTensor contract(const LabeledTensor& a, const LabeledTensor& b, OpCounter& counter,
                       unsigned threads) {
  const auto a_idx = a.indices();
  const auto b_idx = b.indices();
  const auto a_str = a.strides();
  const auto b_str = b.strides();

  std::vector<std::size_t> free_a, shared_a, shared_b, free_b;
  for (std::size_t i = 0; i < a_idx.size(); ++i) {
    if (auto j = b.position(a_idx[i].name)) {
      if (b_idx[*j].dim != a_idx[i].dim) {
        throw DimensionMismatch("index '" + a_idx[i].name + "' has dim " + std::to_string(a_idx[i].dim) +
                                " and " + std::to_string(b_idx[*j].dim));
      }
      shared_a.push_back(i);
      shared_b.push_back(*j);
    } else {
      free_a.push_back(i);
    }
  }
  for (std::size_t j = 0; j < b_idx.size(); ++j) {
    if (!a.has(b_idx[j].name)) free_b.push_back(j);
  }

  std::size_t rows = 1, inner = 1, cols = 1;
  std::vector<IndexLabel> out_idx;
  std::vector<std::size_t> row_dims, row_strides, inner_dims, inner_a, inner_b, col_dims, col_strides;
  for (auto i : free_a) {
    rows *= a_idx[i].dim;
    out_idx.push_back(a_idx[i]);
    row_dims.push_back(a_idx[i].dim);
    row_strides.push_back(a_str[i]);
  }
  for (std::size_t s = 0; s < shared_a.size(); ++s) {
    inner *= a_idx[shared_a[s]].dim;
    inner_dims.push_back(a_idx[shared_a[s]].dim);
    inner_a.push_back(a_str[shared_a[s]]);
    inner_b.push_back(b_str[shared_b[s]]);
  }
  for (auto j : free_b) {
    cols *= b_idx[j].dim;
    out_idx.push_back(b_idx[j]);
    col_dims.push_back(b_idx[j].dim);
    col_strides.push_back(b_str[j]);
  }
  counter.record(static_cast<std::uint64_t>(rows) * inner * cols, static_cast<std::uint64_t>(rows) * cols);

  // Offsets of each shared multi-index inside a.
  std::vector<std::size_t> a_inner_off(inner);
  {
    Odometer od(inner_dims, inner_a);
    for (std::size_t k = 0; k < inner; ++k, od.next()) a_inner_off[k] = od.offset;
  }
  // b as an inner x cols matrix, keeping only its nonzero entries per row.
  std::vector<std::size_t> row_begin(inner + 1, 0);
  std::vector<std::uint32_t> nz_col;
  std::vector<double> nz_re, nz_im;
  {
    const auto bd = b.data();
    Odometer ok(inner_dims, inner_b);
    for (std::size_t k = 0; k < inner; ++k, ok.next()) {
      Odometer oc(col_dims, col_strides);
      for (std::size_t n = 0; n < cols; ++n, oc.next()) {
        const cplx v = bd[ok.offset + oc.offset];
        if (v.real() != 0.0 || v.imag() != 0.0) {
          nz_col.push_back(static_cast<std::uint32_t>(n));
          nz_re.push_back(v.real());
          nz_im.push_back(v.imag());
        }
      }
      row_begin[k + 1] = nz_col.size();
    }
  }

  std::vector<cplx> out(rows * cols);
  const auto ad = a.data();
  parallel_rows(rows, threads, [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return;
    Odometer orow(row_dims, row_strides);
    orow.seek(begin);
    for (std::size_t m = begin; m < end; ++m, orow.next()) {
      // std::complex<double> is layout-compatible with double[2].
      double* dst = reinterpret_cast<double*>(out.data() + m * cols);
      const cplx* arow = ad.data() + orow.offset;
      for (std::size_t k = 0; k < inner; ++k) {
        const cplx av = arow[a_inner_off[k]];
        const double ar = av.real(), ai = av.imag();
        for (std::size_t e = row_begin[k]; e < row_begin[k + 1]; ++e) {
          double* d = dst + 2 * nz_col[e];
          d[0] += ar * nz_re[e] - ai * nz_im[e];
          d[1] += ar * nz_im[e] + ai * nz_re[e];
        }
      }
    }
  });
  return LabeledTensor(std::move(out_idx), std::move(out));
}

LabeledTensor slice(const LabeledTensor& t, std::string_view name, std::size_t position) {
  auto p = t.position(name);
  if (!p) throw IndexError("slice: no index named '" + std::string(name) + "'");
  const auto idx = t.indices();
  if (position >= idx[*p].dim) {
    throw IndexError("slice: position " + std::to_string(position) + " out of range for '" +
                     std::string(name) + "'");
  }
  const auto str = t.strides();
  std::vector<IndexLabel> out_idx;
  std::vector<std::size_t> dims, gather;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    if (d == *p) continue;
    out_idx.push_back(idx[d]);
    dims.push_back(idx[d].dim);
    gather.push_back(str[d]);
  }
  std::vector<cplx> out(element_count(out_idx));
  const std::size_t base = position * str[*p];
  const auto src = t.data();
  Odometer od(dims, gather);
  for (std::size_t i = 0; i < out.size(); ++i, od.next()) out[i] = src[base + od.offset];
  return LabeledTensor(std::move(out_idx), std::move(out));
}

LabeledTensor delta_join(const LabeledTensor& t, std::string_view source, IndexLabel target,
                         std::span<const std::size_t> projector) {
  auto p = t.position(source);
  if (!p) throw IndexError("delta_join: no index named '" + std::string(source) + "'");
  const std::size_t src_dim = t.indices()[*p].dim;
  if (projector.size() != src_dim) throw IndexError("delta_join: projector length must equal the source dim");
  if (t.has(target.name)) throw IndexError("delta_join: index '" + target.name + "' already present");
  for (auto v : projector) {
    if (v >= target.dim) throw IndexError("delta_join: projector image outside the target range");
  }
  const std::size_t stride = t.strides()[*p];
  const std::size_t tdim = target.dim;
  std::vector<IndexLabel> out_idx(t.indices().begin(), t.indices().end());
  out_idx.push_back(std::move(target));
  std::vector<cplx> out(t.size() * tdim);
  const auto src = t.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::size_t s = (i / stride) % src_dim;
    out[i * tdim + projector[s]] = src[i];
  }
  return LabeledTensor(std::move(out_idx), std::move(out));
}

}  // namespace pctnpi
