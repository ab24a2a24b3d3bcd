#ifndef SENSORNET_NEIGHBOR_HPP
#define SENSORNET_NEIGHBOR_HPP

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sensornet/game.hpp"

namespace sensornet::neighbor {

using game::NeighborMap;

/// Undirected communication graph over players, derived from grid positions
/// (4-neighbor adjacency between unit-distance positions).
struct CommGraph {
  std::vector<std::pair<int, int>> positions;
  std::vector<std::vector<int>> adj;

  static CommGraph grid(std::vector<std::pair<int, int>> positions);
  int num_players() const { return static_cast<int>(positions.size()); }
  bool connected() const;
};

/// N_i = all players within graph distance <= k of i. Symmetric by
/// construction.
NeighborMap geometry_neighbors(const CommGraph& graph, int hops);

struct CorrelationSelection {
  std::vector<int> picked;            // candidate indices, in selection order
  std::vector<int> neighbor_players;  // owning players, first-pick order
};

/// Greedy correlation-based selection. P0 and Pt are the prior and
/// target-conditioned covariances of the measurement variables over the
/// candidate set (rows/columns aligned with `owners`), already conditioned
/// on agent i's own search-space variables by the caller. Each step scores
/// e_y = log(P0(y,y)/Pt(y,y)), takes the argmax (lowest index on ties),
/// Schur-downdates both matrices on the picked variable and then retires the
/// owning player's remaining candidates, so each pick recruits one new
/// neighbor. `budget` bounds the number of picks; selection stops early once
/// every owner has been recruited.
CorrelationSelection correlation_select(Eigen::MatrixXd p0, Eigen::MatrixXd pt,
                                        const std::vector<int>& owners,
                                        int budget);

/// Builds the per-player neighbor map for a game backed by a Gaussian
/// engine. For each player the candidate matrices cover all other players'
/// locations with measurement noise on the diagonal; Pt is additionally
/// conditioned on the target set. `condition_on_own` additionally conditions
/// both matrices on all of the player's own candidate variables (off by
/// default: the scores then rank candidates by their raw target information,
/// not by what they add beyond the player's whole region). The resulting map
/// is not symmetrized.
NeighborMap correlation_neighbors_gaussian(const game::SensorGame& g,
                                           const game::GaussianEngine& engine,
                                           int budget,
                                           bool condition_on_own = false);

/// Same construction from precomputed moment matrices over a global
/// candidate list (used by the particle engine, whose Pt is diagonal under
/// conditional independence). `owner_of[loc]` maps location id to player.
NeighborMap correlation_neighbors_from_moments(const Eigen::MatrixXd& p0,
                                               const Eigen::MatrixXd& pt,
                                               const std::vector<int>& owner_of,
                                               int n_players, int budget);

}  // namespace sensornet::neighbor

#endif
