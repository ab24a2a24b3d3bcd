#include "sensornet/neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <set>

#include <Eigen/Cholesky>

namespace sensornet::neighbor {

namespace {

Eigen::MatrixXd pick_block(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                           const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

// Conditional covariance of `keep` given `given`, both index sets into m.
Eigen::MatrixXd schur_condition(const Eigen::MatrixXd& m,
                                const std::vector<int>& keep,
                                const std::vector<int>& given) {
  Eigen::MatrixXd out = pick_block(m, keep, keep);
  if (given.empty()) return out;
  Eigen::MatrixXd pcc = pick_block(m, given, given);
  Eigen::MatrixXd pac = pick_block(m, keep, given);
  Eigen::LLT<Eigen::MatrixXd> llt(pcc);
  if (llt.info() != Eigen::Success) {
    pcc.diagonal().array() += 1e-10 * pcc.trace() / static_cast<double>(pcc.rows());
    llt.compute(pcc);
    if (llt.info() != Eigen::Success)
      throw SingularConditioningBlock("neighbor: conditioning block not PD");
  }
  out -= pac * llt.solve(pac.transpose());
  return 0.5 * (out + out.transpose().eval());
}

}  // namespace

CommGraph CommGraph::grid(std::vector<std::pair<int, int>> positions) {
  CommGraph g;
  g.positions = std::move(positions);
  g.adj.resize(g.positions.size());
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    for (std::size_t j = i + 1; j < g.positions.size(); ++j) {
      const int dx = std::abs(g.positions[i].first - g.positions[j].first);
      const int dy = std::abs(g.positions[i].second - g.positions[j].second);
      if (dx + dy == 1) {
        g.adj[i].push_back(static_cast<int>(j));
        g.adj[j].push_back(static_cast<int>(i));
      }
    }
  }
  return g;
}

bool CommGraph::connected() const {
  if (positions.empty()) return true;
  std::vector<bool> seen(positions.size(), false);
  std::deque<int> queue{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        queue.push_back(w);
      }
  }
  return count == positions.size();
}

NeighborMap geometry_neighbors(const CommGraph& graph, int hops) {
  if (hops < 1) throw InvalidInput("geometry_neighbors: hop radius must be >= 1");
  if (!graph.connected())
    throw InvalidInput("geometry_neighbors: graph must be connected");
  NeighborMap nm;
  nm.neighbors.resize(graph.num_players());
  for (int i = 0; i < graph.num_players(); ++i) {
    std::vector<int> dist(graph.num_players(), -1);
    std::deque<int> queue{i};
    dist[i] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      if (dist[v] == hops) continue;
      for (int w : graph.adj[v])
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
    }
    for (int j = 0; j < graph.num_players(); ++j)
      if (j != i && dist[j] > 0) nm.neighbors[i].push_back(j);
  }
  return nm;
}

CorrelationSelection correlation_select(Eigen::MatrixXd p0, Eigen::MatrixXd pt,
                                        const std::vector<int>& owners,
                                        int budget) {
  const int n = static_cast<int>(owners.size());
  if (p0.rows() != n || pt.rows() != n)
    throw InvalidInput("correlation_select: matrix/owner size mismatch");
  if (budget > n)
    throw InvalidInput("correlation_select: budget exceeds candidate count");
  const double floor0 = 1e-12 * std::max(1.0, p0.trace() / std::max(1, n));
  const double floort = 1e-12 * std::max(1.0, pt.trace() / std::max(1, n));

  CorrelationSelection sel;
  std::vector<int> remaining(n);
  for (int k = 0; k < n; ++k) remaining[k] = k;

  for (int step = 0; step < budget && !remaining.empty(); ++step) {
    int best = -1;
    double best_score = 0.0;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      const double v0 = p0(r, r);
      const double vt = pt(r, r);
      if (v0 <= floor0 || vt <= floort)
        throw SingularDowndate("correlation_select: candidate variance at floor");
      const double score = std::log(v0 / vt);
      if (best < 0 || score > best_score) {
        best = static_cast<int>(r);
        best_score = score;
      }
    }
    const int cand = remaining[best];
    sel.picked.push_back(cand);
    const int owner = owners[cand];
    sel.neighbor_players.push_back(owner);

    // Rank-1 Schur downdate on the picked variable.
    auto downdate = [&](Eigen::MatrixXd& m) {
      const Eigen::VectorXd col = m.col(best);
      m -= (col * col.transpose()) / m(best, best);
    };
    downdate(p0);
    downdate(pt);

    // Drop the picked variable along with the owner's remaining locations:
    // the owner is a neighbor now and contributes its (single) selection to
    // the conditioning set regardless, so its other candidates add nothing.
    auto drop_row = [&](int r) {
      const int last = static_cast<int>(p0.rows()) - 1;
      // Swap-and-shrink keeps remaining[] aligned with matrix indices.
      for (Eigen::MatrixXd* m : {&p0, &pt}) {
        m->row(r).swap(m->row(last));
        m->col(r).swap(m->col(last));
        m->conservativeResize(last, last);
      }
      std::swap(remaining[r], remaining.back());
      remaining.pop_back();
    };
    for (int r = static_cast<int>(remaining.size()) - 1; r >= 0; --r)
      if (owners[remaining[r]] == owner) drop_row(r);
  }
  return sel;
}

namespace {

NeighborMap build_map_from_moments(const Eigen::MatrixXd& p0_full,
                                   const Eigen::MatrixXd& pt_full,
                                   const std::vector<int>& owner_of,
                                   int n_players, int budget,
                                   bool condition_on_own) {
  NeighborMap nm;
  nm.neighbors.resize(n_players);
  for (int i = 0; i < n_players; ++i) {
    std::vector<int> own, cand, cand_owner;
    for (std::size_t loc = 0; loc < owner_of.size(); ++loc) {
      if (owner_of[loc] == i)
        own.push_back(static_cast<int>(loc));
      else {
        cand.push_back(static_cast<int>(loc));
        cand_owner.push_back(owner_of[loc]);
      }
    }
    if (cand.empty()) continue;
    std::vector<int> cond;
    if (condition_on_own) cond = own;
    Eigen::MatrixXd p0 = schur_condition(p0_full, cand, cond);
    Eigen::MatrixXd pt = schur_condition(pt_full, cand, cond);
    const int b = std::min<int>(budget, static_cast<int>(cand.size()));
    CorrelationSelection sel = correlation_select(std::move(p0), std::move(pt),
                                                  cand_owner, b);
    nm.neighbors[i] = sel.neighbor_players;
  }
  return nm;
}

}  // namespace

NeighborMap correlation_neighbors_gaussian(const game::SensorGame& g,
                                           const game::GaussianEngine& engine,
                                           int budget, bool condition_on_own) {
  const auto& jg = engine.joint();
  const auto& noise = engine.noise();
  std::vector<int> locations;
  std::vector<int> owner;
  for (int i = 0; i < g.num_players(); ++i) {
    std::set<int> region;
    for (const auto& a : g.action_sets[i]) region.insert(a.begin(), a.end());
    for (int loc : region) {
      locations.push_back(loc);
      owner.push_back(i);
    }
  }
  const int m = static_cast<int>(locations.size());

  // Measurement-variable moments over the candidate space: prior and
  // target-conditioned covariance, noise on the diagonal.
  Eigen::MatrixXd p0(m, m), pt(m, m);
  Eigen::MatrixXd prior = gauss::condition(jg, locations, {}, &noise);
  Eigen::MatrixXd cond = gauss::condition(jg, locations, engine.targets(), &noise);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      p0(r, c) = prior(r, c);
      pt(r, c) = cond(r, c);
    }
    const double rv = noise.variance(jg.label(locations[r]));
    p0(r, r) += rv;
    pt(r, r) += rv;
  }
  // Matrix rows are indexed by position in `locations`; owner_of follows it.
  NeighborMap nm = build_map_from_moments(p0, pt, owner, g.num_players(), budget,
                                          condition_on_own);
  return nm;
}

NeighborMap correlation_neighbors_from_moments(const Eigen::MatrixXd& p0,
                                               const Eigen::MatrixXd& pt,
                                               const std::vector<int>& owner_of,
                                               int n_players, int budget) {
  return build_map_from_moments(p0, pt, owner_of, n_players, budget, false);
}

}  // namespace sensornet::neighbor
