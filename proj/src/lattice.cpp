#include "mvpf/lattice.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mvpf {

LevelGrid::LevelGrid(unsigned l) : level(l) {
  if (l > 30) throw std::invalid_argument("LevelGrid: level too large");
}

double LevelGrid::dt() const { return std::ldexp(1.0, -static_cast<int>(level)); }

LevelGrid LevelGrid::coarser() const {
  if (level == 0) throw std::invalid_argument("LevelGrid: level 0 has no coarser level");
  return LevelGrid(level - 1);
}

std::string to_string(Role r) {
  switch (r) {
    case Role::law:
      return "law";
    case Role::filter:
      return "filter";
    case Role::resample:
      return "resample";
    case Role::data:
      return "data";
  }
  return "unknown";
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 keyed_engine(std::uint64_t seed, const StreamId& id) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ id.replication);
  h = mix64(h ^ static_cast<std::uint64_t>(id.role));
  h = mix64(h ^ id.level);
  h = mix64(h ^ id.sub);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    h = mix64(h);
    words[i] = static_cast<std::uint32_t>(h);
    words[i + 1] = static_cast<std::uint32_t>(h >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamId id)
    : seed_(seed), id_(id), engine_(keyed_engine(seed, id)) {}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

Matrix gaussian_increments(RngStream& stream, std::size_t count, std::size_t dim, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("gaussian_increments: dt must be positive");
  if (count == 0 || dim == 0) throw std::invalid_argument("gaussian_increments: empty shape");
  Matrix out(count, dim);
  const double sd = std::sqrt(dt);
  for (auto& v : out.data()) v = sd * stream.normal();
  return out;
}

CoupledIncrements coupled_increments(RngStream& stream, LevelGrid fine, std::size_t dim) {
  auto block = coupled_increments(stream, fine, 1, dim);
  CoupledIncrements out{Matrix(2, dim), std::vector<double>(dim)};
  for (std::size_t k = 0; k < dim; ++k) {
    out.fine(0, k) = block.first(0, k);
    out.fine(1, k) = block.second(0, k);
    out.coarse[k] = block.coarse(0, k);
  }
  return out;
}

CoupledIncrementBlock coupled_increments(RngStream& stream, LevelGrid fine, std::size_t count,
                                         std::size_t dim) {
  if (fine.level == 0)
    throw std::invalid_argument("coupled_increments: level 0 has no coarser level");
  CoupledIncrementBlock b;
  b.first = gaussian_increments(stream, count, dim, fine.dt());
  b.second = gaussian_increments(stream, count, dim, fine.dt());
  b.coarse = Matrix(count, dim);
  for (std::size_t i = 0; i < b.coarse.data().size(); ++i)
    b.coarse.data()[i] = b.first.data()[i] + b.second.data()[i];
  return b;
}

}  // namespace mvpf
