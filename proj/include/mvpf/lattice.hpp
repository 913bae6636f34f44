#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "mvpf/model.hpp"

namespace mvpf {

/// Euler grid of level l: step 2^-l, 2^l steps per unit time.
struct LevelGrid {
  unsigned level = 0;

  explicit LevelGrid(unsigned l);

  double dt() const;
  std::size_t steps_per_unit() const { return std::size_t{1} << level; }
  /// The grid one level coarser. Throws for level 0.
  LevelGrid coarser() const;
};

enum class Role : std::uint8_t { law = 0, filter = 1, resample = 2, data = 3 };

std::string to_string(Role r);

/// Structured label of one random stream.
struct StreamId {
  std::uint64_t replication = 0;
  Role role = Role::law;
  std::uint32_t level = 0;
  std::uint32_t sub = 0;

  bool operator==(const StreamId&) const = default;
};

/// Seedable random stream.
///
/// The engine key is derived from (seed, replication, role, level, sub)
/// through a SplitMix64 chain, so each label gives its own sequence and a
/// run is reproducible from the seed and labels alone. Streams are value
/// types; copy one to fork its current state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t seed() const { return seed_; }
  const StreamId& id() const { return id_; }

  /// U[0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t seed_;
  StreamId id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// count x dim i.i.d. N(0, dt) entries, drawn row by row.
Matrix gaussian_increments(RngStream& stream, std::size_t count, std::size_t dim, double dt);

struct CoupledIncrements {
  Matrix fine;                  // 2 x dim: the two fine increments of one coarse step
  std::vector<double> coarse;   // fine.row(0) + fine.row(1)
};

/// Synchronous coupling for one coarse step of `fine.coarser()`.
CoupledIncrements coupled_increments(RngStream& stream, LevelGrid fine, std::size_t dim);

struct CoupledIncrementBlock {
  Matrix first;   // count x dim, fine step 2c
  Matrix second;  // count x dim, fine step 2c+1
  Matrix coarse;  // first + second, entrywise
};

/// Batched form for `count` particles. Draws `first` then `second` with
/// gaussian_increments, so the fine side consumes the stream exactly as two
/// uncoupled fine steps would.
CoupledIncrementBlock coupled_increments(RngStream& stream, LevelGrid fine, std::size_t count,
                                         std::size_t dim);

}  // namespace mvpf
