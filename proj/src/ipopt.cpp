#include "visopt/ipopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "visopt/errors.hpp"
#include "visopt/parallel.hpp"
#include "visopt/raster.hpp"
#include "visopt/rng.hpp"

namespace visopt {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMcmcEps = 1e-9;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// C(n, k) capped at `cap` to avoid overflow.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k,
                            std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double acc = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * double(n - k + i) / double(i);
    if (acc > (long double)(cap) * 2.0L) return cap + 1;
  }
  return std::uint64_t(acc + 0.5L);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng) {
  // Partial Fisher-Yates over an index pool.
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + rng.uniform_int(n - i)]);
  pool.resize(k);
  return pool;
}

}  // namespace

CandidateGrid build_candidates(const std::vector<VirtualRail>& rails,
                               int positions, int yaws, int pitches) {
  if (rails.empty()) throw PreconditionError("need at least one rail");
  if (positions < 1 || yaws < 1 || pitches < 1)
    throw PreconditionError("grid counts must be >= 1");
  CandidateGrid grid;
  grid.positions = positions;
  grid.yaws = yaws;
  grid.pitches = pitches;
  grid.rail_count = rails.size();
  grid.candidates.reserve(rails.size() * positions * yaws * pitches);
  for (std::size_t r = 0; r < rails.size(); ++r) {
    for (int kp = 1; kp <= positions; ++kp) {
      const double frac = double(kp) / double(positions);
      const Vec3 pos = rails[r].p1 + frac * (rails[r].p2 - rails[r].p1);
      for (int ky = 1; ky <= yaws; ++ky) {
        const double yaw = 2.0 * kPi * double(ky) / double(yaws);
        for (int kt = 1; kt <= pitches; ++kt) {
          const double pitch = double(kt) * kPi / 10.0;  // 18 deg steps
          Candidate c;
          c.pose = CanonicalPose{pos, yaw, pitch};
          c.rail_index = r;
          c.fraction = frac;
          c.yaw_index = ky;
          c.pitch_index = kt;
          grid.candidates.push_back(c);
        }
      }
    }
  }
  return grid;
}

void fill_vismatrix_rows(VisibilityMatrix& vm, const CandidateGrid& grid,
                         const Scenario& scenario, const Intrinsics& intr,
                         std::size_t row_begin, std::size_t row_end,
                         int threads) {
  const std::size_t nf = scenario.frames.size();
  // Column start of each frame's object block.
  std::vector<std::size_t> frame_col(nf + 1, 0);
  for (std::size_t l = 0; l < nf; ++l)
    frame_col[l + 1] = frame_col[l] + scenario.frames[l].objects.size();

  std::vector<std::vector<Mesh>> meshes(nf);
  for (std::size_t l = 0; l < nf; ++l)
    meshes[l] = scene_meshes(scenario.frames[l], scenario.environment);

  const std::size_t pending = (row_end - row_begin) * nf;
  parallel_map<int>(pending, threads, [&](std::size_t task) {
    const std::size_t i = row_begin + task / nf;
    const std::size_t l = task % nf;
    const auto cams = camera_matrices(grid.candidates[i].pose, intr);
    const auto [db, fb] = rasterize(meshes[l], cams, intr);
    std::unordered_map<std::int32_t, std::uint32_t> hist;
    for (const std::int32_t id : fb.frag)
      if (id >= 0) ++hist[id];
    std::size_t j = frame_col[l];
    for (const ObjectBox& obj : scenario.frames[l].objects) {
      const auto it = hist.find(obj.id);
      vm.counts[i * vm.cols + j] = it == hist.end() ? 0u : it->second;
      ++j;
    }
    return 0;
  });
}

VisibilityMatrix build_vismatrix(const CandidateGrid& grid,
                                 const Scenario& scenario,
                                 const Intrinsics& intr, int threads) {
  validate(scenario);
  VisibilityMatrix vm;
  vm.rows = grid.candidates.size();
  vm.width = intr.width;
  vm.height = intr.height;
  vm.positions = grid.positions;
  vm.yaws = grid.yaws;
  vm.pitches = grid.pitches;
  vm.rail_count = grid.rail_count;
  for (std::size_t l = 0; l < scenario.frames.size(); ++l)
    for (const ObjectBox& obj : scenario.frames[l].objects)
      vm.columns.emplace_back(l, obj.id);
  vm.cols = vm.columns.size();
  vm.counts.assign(vm.rows * vm.cols, 0u);
  fill_vismatrix_rows(vm, grid, scenario, intr, 0, vm.rows, threads);
  return vm;
}

std::int64_t ip_objective(const VisibilityMatrix& vm,
                          const std::vector<std::size_t>& chosen) {
  if (chosen.empty()) return 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 0; j < vm.cols; ++j) {
    std::int64_t sum = 0;
    for (const std::size_t i : chosen) sum += vm.at(i, j);
    best = std::min(best, sum);
  }
  return vm.cols == 0 ? 0 : best;
}

IPSolution solve_exhaustive(const VisibilityMatrix& vm, int n,
                            std::uint64_t budget) {
  if (n < 1) throw PreconditionError("sensor count must be >= 1");
  IPSolution sol;
  sol.solver = "exhaustive";
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t rows = vm.rows;

  if (std::size_t(n) >= rows) {
    sol.chosen.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) sol.chosen[i] = i;
    sol.z = ip_objective(vm, sol.chosen);
    sol.iterations = 1;
    sol.elapsed = seconds_since(t0);
    return sol;
  }

  const std::uint64_t combos = choose_capped(rows, std::uint64_t(n), budget);
  if (combos > budget)
    throw BudgetError(
        "exhaustive enumeration would exceed the combination budget; "
        "use the naive or mcmc solver");

  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[i] = std::size_t(i);
  std::vector<std::int64_t> col_sum(vm.cols);

  std::int64_t best_z = -1;
  std::vector<std::size_t> best_idx;
  std::int64_t evaluated = 0;
  while (true) {
    std::fill(col_sum.begin(), col_sum.end(), 0);
    for (const std::size_t i : idx)
      for (std::size_t j = 0; j < vm.cols; ++j) col_sum[j] += vm.at(i, j);
    std::int64_t z = std::numeric_limits<std::int64_t>::max();
    for (const std::int64_t s : col_sum) z = std::min(z, s);
    if (vm.cols == 0) z = 0;
    ++evaluated;
    if (z > best_z) {  // lexicographic enumeration: first optimum kept
      best_z = z;
      best_idx = idx;
    }
    // Advance to the next combination in lexicographic order.
    int k = n - 1;
    while (k >= 0 && idx[k] == rows - std::size_t(n - k)) --k;
    if (k < 0) break;
    ++idx[k];
    for (int m = k + 1; m < n; ++m) idx[m] = idx[m - 1] + 1;
  }

  sol.chosen = best_idx;
  sol.z = best_z;
  sol.iterations = evaluated;
  sol.elapsed = seconds_since(t0);
  return sol;
}

IPSolution solve_naive(const VisibilityMatrix& vm, int n,
                       const StopRule& stop, std::uint64_t rng_seed) {
  if (n < 1) throw PreconditionError("sensor count must be >= 1");
  if (std::size_t(n) > vm.rows)
    throw PreconditionError("sensor count exceeds candidate count");
  Rng rng(rng_seed);
  IPSolution sol;
  sol.solver = "naive";
  const auto t0 = std::chrono::steady_clock::now();
  auto last_improvement = t0;

  while (true) {
    if (stop.max_iterations >= 0 && sol.iterations >= stop.max_iterations)
      break;
    if (stop.max_seconds > 0.0 &&
        seconds_since(last_improvement) > stop.max_seconds)
      break;
    auto pick = sample_without_replacement(vm.rows, std::size_t(n), rng);
    std::sort(pick.begin(), pick.end());
    const std::int64_t z = ip_objective(vm, pick);
    ++sol.iterations;
    if (z >= sol.z) {  // equal scores refresh the improvement timer
      if (z > sol.z || sol.chosen.empty()) sol.chosen = std::move(pick);
      sol.z = z;
      last_improvement = std::chrono::steady_clock::now();
    }
  }
  sol.elapsed = seconds_since(t0);
  return sol;
}

IPSolution solve_mcmc(const VisibilityMatrix& vm, int n, const StopRule& stop,
                      std::uint64_t rng_seed) {
  if (n < 1) throw PreconditionError("sensor count must be >= 1");
  if (std::size_t(n) >= vm.rows)
    throw PreconditionError("mcmc needs sensor count below candidate count");
  Rng rng(rng_seed);
  IPSolution sol;
  sol.solver = "mcmc";
  const auto t0 = std::chrono::steady_clock::now();
  auto last_improvement = t0;

  // Chosen set plus its complement, swapped in place by proposals.
  std::vector<std::size_t> pool(vm.rows);
  for (std::size_t i = 0; i < vm.rows; ++i) pool[i] = i;
  for (std::size_t i = 0; i < std::size_t(n); ++i)
    std::swap(pool[i], pool[i + rng.uniform_int(vm.rows - i)]);

  std::vector<std::size_t> current(pool.begin(), pool.begin() + n);
  std::int64_t z = ip_objective(vm, current);
  sol.chosen = current;
  std::sort(sol.chosen.begin(), sol.chosen.end());
  sol.z = z;

  while (true) {
    if (stop.max_iterations >= 0 && sol.iterations >= stop.max_iterations)
      break;
    if (stop.max_seconds > 0.0 &&
        seconds_since(last_improvement) > stop.max_seconds)
      break;
    const std::size_t ci = std::size_t(n) + rng.uniform_int(vm.rows - n);
    const std::size_t si = rng.uniform_int(std::size_t(n));
    std::swap(pool[si], pool[ci]);
    current.assign(pool.begin(), pool.begin() + n);
    const std::int64_t z_prop = ip_objective(vm, current);
    const double r = double(z_prop) / (double(z) + kMcmcEps);
    const bool accept = rng.uniform() <= std::min(1.0, r);
    ++sol.iterations;
    if (accept) {
      z = z_prop;
    } else {
      std::swap(pool[si], pool[ci]);  // revert
    }
    // Best-ever tracking considers every proposal, accepted or not.
    if (z_prop >= sol.z) {
      if (z_prop > sol.z) {
        sol.chosen = current;
        std::sort(sol.chosen.begin(), sol.chosen.end());
        sol.z = z_prop;
      }
      last_improvement = std::chrono::steady_clock::now();
    }
  }
  sol.elapsed = seconds_since(t0);
  return sol;
}

}  // namespace visopt
