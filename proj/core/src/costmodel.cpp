#include <string>

#include "edgemig/env.hpp"
#include "edgemig/error.hpp"

namespace edgemig {

double migration_delay(int hops, double mc) {
  if (hops < 0) throw Error(Errc::NegativeHops, std::to_string(hops));
  return hops == 0 ? 0.0 : mc * hops;
}

double computation_delay(double cycles, double load, double f) {
  if (!(f > 0.0)) throw Error(Errc::ZeroCapacity, "server capacity must be positive");
  return (load + cycles) / f;
}

double access_delay(double data, double rho) {
  if (!(rho > 0.0)) throw Error(Errc::ZeroRate, "upload rate must be positive");
  return data / rho;
}

double backhaul_delay(int hops, double data, double eta, double lambda_bh) {
  if (hops < 0) throw Error(Errc::NegativeHops, std::to_string(hops));
  if (!(eta > 0.0)) throw Error(Errc::ZeroBandwidth, "backhaul bandwidth must be positive");
  if (hops == 0) return 0.0;
  return data / eta + 2.0 * lambda_bh * hops;
}

CostBreakdown slot_cost(ServerId prev, ServerId action, const SlotInputs& in, const GridSpec& grid,
                        const EnvConfig& cfg) {
  CostBreakdown b;
  b.migration = migration_delay(hop_distance(prev, action, grid), in.mc);
  b.computation = computation_delay(in.cycles, in.load_at_action, cfg.f_cycles_per_s);
  b.access = access_delay(in.data, in.rho);
  b.backhaul = backhaul_delay(hop_distance(action, in.user, grid), in.data, cfg.eta_bps,
                              cfg.lambda_bh_s_per_hop);
  return b;
}

}  // namespace edgemig
