#pragma once

#include "inrflow/sparse.hpp"

namespace inrflow {

// DOF-level constraints: strong Dirichlet values and hanging-node linear
// relations x_slave = sum w_m x_master. Dirichlet wins when both are set for
// the same DOF (wall nodes that also hang). After finalize(), the system can
// be condensed to free DOFs and solutions recovered constraint-exact.
class Constraints {
public:
  void add_dirichlet(std::uint32_t dof, double value);
  void add_linear(std::uint32_t dof, std::vector<std::pair<std::uint32_t, double>> masters);

  // Resolves master chains (errors on cycles) and assigns reduced indices.
  void finalize(std::uint32_t ndof);

  bool finalized() const { return finalized_; }
  std::uint32_t ndof() const { return ndof_; }
  std::uint32_t free_count() const { return free_count_; }
  bool is_free(std::uint32_t dof) const { return kind_[dof] == Kind::Free; }
  bool is_fixed(std::uint32_t dof) const { return kind_[dof] == Kind::Fixed; }
  std::uint32_t reduced_index(std::uint32_t dof) const { return reduced_[dof]; }

  // Expansion of a DOF in terms of free reduced DOFs plus a constant.
  struct Expansion {
    std::vector<std::pair<std::uint32_t, double>> terms;  // (reduced index, weight)
    double constant = 0.0;
  };
  const Expansion& expansion(std::uint32_t dof) const { return expansion_[dof]; }

  // Condenses A (triplets over the full DOF space) and b to the free DOFs:
  // A_ff = R^T A R, b_f = R^T (b - A g).
  void reduce(const std::vector<Triplet>& a_triplets, std::span<const double> b,
              std::vector<Triplet>& a_red, std::vector<double>& b_red) const;

  std::vector<double> reduce_vector(std::span<const double> full) const;  // R^T v

  // Values of the free DOFs (restriction, not the adjoint).
  std::vector<double> restrict_free(std::span<const double> full) const;

  // Full vector from reduced values; all constraints satisfied exactly.
  std::vector<double> recover(std::span<const double> reduced) const;

  // Homogeneous expansion R * reduced (constants dropped): increments of
  // fixed DOFs are zero, hanging increments interpolate their masters.
  std::vector<double> recover_increment(std::span<const double> reduced) const;

  // Overwrites constrained entries of a full vector in place (Dirichlet
  // values and master interpolations).
  void enforce(std::span<double> full) const;

private:
  enum class Kind : std::uint8_t { Free, Fixed, Linear };

  bool finalized_ = false;
  std::uint32_t ndof_ = 0;
  std::uint32_t free_count_ = 0;
  std::vector<Kind> kind_;
  std::vector<double> value_;  // Dirichlet values
  std::vector<std::vector<std::pair<std::uint32_t, double>>> masters_;
  std::vector<std::uint32_t> reduced_;
  std::vector<std::uint32_t> free_dofs_;  // reduced index -> dof
  std::vector<Expansion> expansion_;

  // Pending constraints before finalize.
  std::vector<std::pair<std::uint32_t, double>> pending_dirichlet_;
  std::vector<std::pair<std::uint32_t, std::vector<std::pair<std::uint32_t, double>>>>
      pending_linear_;
};

}  // namespace inrflow
