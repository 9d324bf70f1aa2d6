#include "edgemig/optim.hpp"

#include <limits>

#include "edgemig/error.hpp"

namespace edgemig::agents {

CostTensor build_cost_tensor(const OracleSnapshot& snap, const GridSpec& grid, const EnvConfig& cfg) {
  CostTensor ct;
  ct.horizon = snap.horizon();
  ct.servers = grid.num_servers();
  if (ct.horizon > 0) ct.a_init = snap.user_cell.front();
  ct.step_cost.resize(static_cast<std::size_t>(ct.horizon) * static_cast<std::size_t>(ct.servers) *
                      static_cast<std::size_t>(ct.servers));
  for (int t = 0; t < ct.horizon; ++t) {
    for (int a = 0; a < ct.servers; ++a) {
      const SlotInputs in = snap.inputs(t, ServerId(a));
      for (int p = 0; p < ct.servers; ++p)
        ct.at(t, p, a) = slot_cost(ServerId(p), ServerId(a), in, grid, cfg).total();
    }
  }
  return ct;
}

OptimResult optim_solve(const CostTensor& ct) {
  OptimResult res;
  const int T = ct.horizon, M = ct.servers;
  if (T == 0) return res;
  std::vector<double> v(static_cast<std::size_t>(M)), next(static_cast<std::size_t>(M));
  std::vector<int> back(static_cast<std::size_t>(T) * static_cast<std::size_t>(M), -1);
  for (int a = 0; a < M; ++a) v[static_cast<std::size_t>(a)] = ct.at(0, ct.a_init.index, a);
  for (int t = 1; t < T; ++t) {
    for (int a = 0; a < M; ++a) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int p = 0; p < M; ++p) {
        const double c = v[static_cast<std::size_t>(p)] + ct.at(t, p, a);
        if (c < best) {
          best = c;
          arg = p;
        }
      }
      next[static_cast<std::size_t>(a)] = best;
      back[static_cast<std::size_t>(t * M + a)] = arg;
    }
    v.swap(next);
  }
  int a = 0;
  for (int k = 1; k < M; ++k)
    if (v[static_cast<std::size_t>(k)] < v[static_cast<std::size_t>(a)]) a = k;
  res.total = v[static_cast<std::size_t>(a)];
  res.actions.assign(static_cast<std::size_t>(T), ServerId());
  for (int t = T - 1; t >= 0; --t) {
    res.actions[static_cast<std::size_t>(t)] = ServerId(a);
    if (t > 0) a = back[static_cast<std::size_t>(t * M + a)];
  }
  return res;
}

double sequence_cost(const CostTensor& ct, std::span<const ServerId> actions) {
  if (static_cast<int>(actions.size()) != ct.horizon)
    throw Error(Errc::LengthMismatch, "action sequence length differs from the horizon");
  double total = 0.0;
  int prev = ct.a_init.index;
  for (int t = 0; t < ct.horizon; ++t) {
    const int a = actions[static_cast<std::size_t>(t)].index;
    if (a < 0 || a >= ct.servers) throw Error(Errc::UnknownServer, "action out of range");
    total += ct.at(t, prev, a);
    prev = a;
  }
  return total;
}

}  // namespace edgemig::agents
