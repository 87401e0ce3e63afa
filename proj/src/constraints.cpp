#include "inrflow/constraints.hpp"

#include <algorithm>

namespace inrflow {

void Constraints::add_dirichlet(std::uint32_t dof, double value) {
  if (finalized_) throw Error(ErrorCode::InvalidArgument, "constraints already finalized");
  pending_dirichlet_.push_back({dof, value});
}

void Constraints::add_linear(std::uint32_t dof,
                             std::vector<std::pair<std::uint32_t, double>> masters) {
  if (finalized_) throw Error(ErrorCode::InvalidArgument, "constraints already finalized");
  pending_linear_.push_back({dof, std::move(masters)});
}

void Constraints::finalize(std::uint32_t ndof) {
  ndof_ = ndof;
  kind_.assign(ndof, Kind::Free);
  value_.assign(ndof, 0.0);
  masters_.assign(ndof, {});

  for (const auto& [dof, ms] : pending_linear_) {
    if (dof >= ndof) throw Error(ErrorCode::InvalidArgument, "constraint dof out of range");
    kind_[dof] = Kind::Linear;
    masters_[dof] = ms;
  }
  // Dirichlet overrides hanging relations (wall nodes that also hang).
  for (const auto& [dof, v] : pending_dirichlet_) {
    if (dof >= ndof) throw Error(ErrorCode::InvalidArgument, "constraint dof out of range");
    kind_[dof] = Kind::Fixed;
    value_[dof] = v;
    masters_[dof].clear();
  }

  reduced_.assign(ndof, 0);
  free_dofs_.clear();
  free_count_ = 0;
  for (std::uint32_t i = 0; i < ndof; ++i)
    if (kind_[i] == Kind::Free) {
      reduced_[i] = free_count_++;
      free_dofs_.push_back(i);
    }

  // Resolve expansions; chase master chains with cycle detection.
  expansion_.assign(ndof, {});
  std::vector<std::uint8_t> state(ndof, 0);  // 0 new, 1 on path, 2 done

  auto resolve = [&](auto&& self, std::uint32_t dof) -> const Expansion& {
    if (state[dof] == 2) return expansion_[dof];
    if (state[dof] == 1)
      throw Error(ErrorCode::InvalidArgument,
                  "cyclic constraints at dof " + std::to_string(dof));
    state[dof] = 1;
    Expansion& e = expansion_[dof];
    switch (kind_[dof]) {
      case Kind::Free:
        e.terms.push_back({reduced_[dof], 1.0});
        break;
      case Kind::Fixed:
        e.constant = value_[dof];
        break;
      case Kind::Linear: {
        for (const auto& [m, w] : masters_[dof]) {
          if (m >= ndof_)
            throw Error(ErrorCode::InvalidArgument, "constraint master out of range");
          const Expansion& me = self(self, m);
          e.constant += w * me.constant;
          for (const auto& [ri, mw] : me.terms) e.terms.push_back({ri, w * mw});
        }
        // Merge duplicate reduced indices.
        std::sort(e.terms.begin(), e.terms.end());
        std::size_t out = 0;
        for (std::size_t i = 0; i < e.terms.size();) {
          std::uint32_t ri = e.terms[i].first;
          double acc = 0.0;
          while (i < e.terms.size() && e.terms[i].first == ri) acc += e.terms[i++].second;
          e.terms[out++] = {ri, acc};
        }
        e.terms.resize(out);
        break;
      }
    }
    state[dof] = 2;
    return e;
  };
  for (std::uint32_t i = 0; i < ndof; ++i) resolve(resolve, i);
  finalized_ = true;
}

void Constraints::reduce(const std::vector<Triplet>& a_triplets, std::span<const double> b,
                         std::vector<Triplet>& a_red, std::vector<double>& b_red) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  a_red.clear();
  b_red.assign(free_count_, 0.0);

  if (!b.empty())
    for (std::uint32_t i = 0; i < ndof_; ++i)
      for (const auto& [ri, wi] : expansion_[i].terms) b_red[ri] += wi * b[i];

  for (const Triplet& t : a_triplets) {
    const Expansion& er = expansion_[t.row];
    const Expansion& ec = expansion_[t.col];
    for (const auto& [ri, wi] : er.terms) {
      for (const auto& [rj, wj] : ec.terms)
        a_red.push_back({ri, rj, wi * wj * t.value});
      if (ec.constant != 0.0) b_red[ri] -= wi * t.value * ec.constant;
    }
  }
}

std::vector<double> Constraints::reduce_vector(std::span<const double> full) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  std::vector<double> out(free_count_, 0.0);
  for (std::uint32_t i = 0; i < ndof_; ++i)
    for (const auto& [ri, wi] : expansion_[i].terms) out[ri] += wi * full[i];
  return out;
}

std::vector<double> Constraints::restrict_free(std::span<const double> full) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  std::vector<double> out(free_count_);
  for (std::uint32_t r = 0; r < free_count_; ++r) out[r] = full[free_dofs_[r]];
  return out;
}

std::vector<double> Constraints::recover(std::span<const double> reduced) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  std::vector<double> full(ndof_, 0.0);
  for (std::uint32_t i = 0; i < ndof_; ++i) {
    double v = expansion_[i].constant;
    for (const auto& [ri, wi] : expansion_[i].terms) v += wi * reduced[ri];
    full[i] = v;
  }
  return full;
}

std::vector<double> Constraints::recover_increment(std::span<const double> reduced) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  std::vector<double> full(ndof_, 0.0);
  for (std::uint32_t i = 0; i < ndof_; ++i) {
    double v = 0.0;
    for (const auto& [ri, wi] : expansion_[i].terms) v += wi * reduced[ri];
    full[i] = v;
  }
  return full;
}

void Constraints::enforce(std::span<double> full) const {
  if (!finalized_) throw Error(ErrorCode::InvalidArgument, "constraints not finalized");
  for (std::uint32_t i = 0; i < ndof_; ++i) {
    if (kind_[i] == Kind::Fixed) {
      full[i] = value_[i];
    } else if (kind_[i] == Kind::Linear) {
      // Expansions reference reduced (free) indices, which chains resolve to.
      double v = expansion_[i].constant;
      for (const auto& [ri, wi] : expansion_[i].terms) v += wi * full[free_dofs_[ri]];
      full[i] = v;
    }
  }
}

}  // namespace inrflow
