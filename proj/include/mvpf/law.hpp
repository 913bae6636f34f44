#pragma once

#include <utility>
#include <vector>

#include "mvpf/interaction.hpp"
#include "mvpf/lattice.hpp"
#include "mvpf/model.hpp"

namespace mvpf {

/// Interacting-particle approximation of the law over one unit interval:
/// clouds at t-1 + k*dt for k = 0 .. steps_per_unit.
struct LawLattice {
  LevelGrid grid{0};
  std::size_t m = 0;
  std::vector<ParticleCloud> clouds;

  const ParticleCloud& terminal() const { return clouds.back(); }
};

/// Advances `input` (m particles) over one unit interval. Every particle
/// interacts with the whole current cloud, itself included. Draws m x d
/// increments from `stream` per fine step.
LawLattice propagate_law(const ModelSpec& model, LevelGrid grid, std::size_t m,
                         const ParticleCloud& input, RngStream& stream,
                         Backend backend = Backend::automatic);

/// Fine (level l) and coarse (level l-1) lattices driven by the same Brownian
/// paths: particle i of the coarse system uses the sum of particle i's two fine
/// increments. The fine side consumes `stream` exactly as propagate_law does.
std::pair<LawLattice, LawLattice> propagate_law_coupled(const ModelSpec& model, LevelGrid fine,
                                                        std::size_t m,
                                                        const ParticleCloud& input_fine,
                                                        const ParticleCloud& input_coarse,
                                                        RngStream& stream,
                                                        Backend backend = Backend::automatic);

namespace detail {

struct StepScratch {
  std::vector<double> s1, s2;
};

/// Euler displacement of each particle of `x` for one step whose mean fields
/// are taken against `source`.
void step_displacement(const ModelSpec& model, const ParticleCloud& x, const ParticleCloud& source,
                       double dt, const Matrix& dW, Matrix& out, Backend backend,
                       StepScratch& scratch);

/// x + d.
ParticleCloud shifted(const ParticleCloud& x, const Matrix& d);
/// x + (d1 + d2). Displacements are accumulated per coarse step so that two
/// fine steps and the matching coarse step round identically whenever their
/// displacements agree.
ParticleCloud shifted(const ParticleCloud& x, const Matrix& d1, const Matrix& d2);

}  // namespace detail

}  // namespace mvpf
