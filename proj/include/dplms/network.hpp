#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace dplms {

/// Thrown when a connected topology cannot be produced within the retry budget.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected graph over N agents. Adjacency stores no self-edges; every
/// neighborhood nevertheless contains its own node.
class NetworkTopology {
public:
    NetworkTopology(std::size_t node_count, std::vector<Edge> edges,
                    std::optional<std::vector<Point2>> positions = std::nullopt);

    std::size_t node_count() const noexcept { return node_count_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::optional<std::vector<Point2>>& positions() const noexcept { return positions_; }

    bool adjacent(std::size_t a, std::size_t b) const;

    /// Sorted neighborhood of `n`, including `n` itself.
    const std::vector<std::size_t>& neighborhood(std::size_t n) const { return neighborhoods_.at(n); }

    /// Number of neighbors excluding `n`.
    std::size_t degree(std::size_t n) const { return neighborhood(n).size() - 1; }

    bool is_connected() const;

    nlohmann::json to_json() const;

private:
    std::size_t node_count_;
    std::vector<Edge> edges_;  // (a, b) with a < b, lexicographically sorted
    std::vector<char> adjacency_;
    std::vector<std::vector<std::size_t>> neighborhoods_;
    std::optional<std::vector<Point2>> positions_;
};

inline constexpr int kTopologyRetryBudget = 1000;

/// Erdos-Renyi G(n, p), resampled until connected.
NetworkTopology gen_random_topology(std::size_t n, double p, std::uint64_t seed);

/// Random geometric graph in the unit square, resampled until connected.
NetworkTopology gen_geometric_topology(std::size_t n, double radius, std::uint64_t seed);

/// Nonnegative N x N weights; entry (l, n) is the weight node n gives to
/// neighbor l. Each column is supported on the neighborhood and sums to one.
class CombinationMatrix {
public:
    /// Validates support against `topology` and column normalization (1e-12).
    CombinationMatrix(Eigen::MatrixXd weights, const NetworkTopology& topology);

    static CombinationMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    double operator()(std::size_t l, std::size_t n) const { return weights_(l, n); }
    const Eigen::MatrixXd& matrix() const noexcept { return weights_; }

    /// Indices l with nonzero weight in column n, ascending.
    const std::vector<std::size_t>& support(std::size_t n) const { return support_.at(n); }

private:
    explicit CombinationMatrix(Eigen::MatrixXd weights);

    Eigen::MatrixXd weights_;
    std::vector<std::vector<std::size_t>> support_;
};

/// a_{l,n} = 1 / |N_n| for l in N_n.
CombinationMatrix uniform_combination(const NetworkTopology& topology);

}  // namespace dplms
