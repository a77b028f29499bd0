#include "dplms/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dplms/random.hpp"

namespace dplms {

NetworkTopology::NetworkTopology(std::size_t node_count, std::vector<Edge> edges,
                                 std::optional<std::vector<Point2>> positions)
    : node_count_(node_count), adjacency_(node_count * node_count, 0), positions_(std::move(positions)) {
    if (node_count == 0) throw std::invalid_argument("topology needs at least one node");
    if (positions_ && positions_->size() != node_count)
        throw std::invalid_argument("position count does not match node count");

    for (auto& [a, b] : edges) {
        if (a >= node_count || b >= node_count) throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-edges are implicit and may not be stored");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    for (const auto& [a, b] : edges_) {
        adjacency_[a * node_count_ + b] = 1;
        adjacency_[b * node_count_ + a] = 1;
    }
    neighborhoods_.resize(node_count_);
    for (std::size_t n = 0; n < node_count_; ++n) {
        for (std::size_t l = 0; l < node_count_; ++l) {
            if (l == n || adjacency_[l * node_count_ + n]) neighborhoods_[n].push_back(l);
        }
    }
}

bool NetworkTopology::adjacent(std::size_t a, std::size_t b) const {
    if (a >= node_count_ || b >= node_count_) throw std::out_of_range("node index out of range");
    return adjacency_[a * node_count_ + b] != 0;
}

bool NetworkTopology::is_connected() const {
    std::vector<char> seen(node_count_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (auto v : neighborhoods_[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == node_count_;
}

nlohmann::json NetworkTopology::to_json() const {
    nlohmann::json doc;
    doc["nodes"] = node_count_;
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : edges_) edges.push_back({a, b});
    doc["edges"] = std::move(edges);
    if (positions_) {
        auto coords = nlohmann::json::array();
        for (const auto& p : *positions_) coords.push_back({p.x, p.y});
        doc["positions"] = std::move(coords);
    }
    return doc;
}

NetworkTopology gen_random_topology(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random topology needs n >= 2");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < kTopologyRetryBudget; ++attempt) {
        std::vector<Edge> edges;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (unit(rng) < p) edges.emplace_back(a, b);
            }
        }
        NetworkTopology topology(n, std::move(edges));
        if (topology.is_connected()) return topology;
    }
    std::ostringstream msg;
    msg << "no connected random topology with n=" << n << ", p=" << p << " after " << kTopologyRetryBudget
        << " attempts";
    throw TopologyError(msg.str());
}

NetworkTopology gen_geometric_topology(std::size_t n, double radius, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("geometric topology needs n >= 2");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be positive");

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r2 = radius * radius;
    for (int attempt = 0; attempt < kTopologyRetryBudget; ++attempt) {
        std::vector<Point2> points(n);
        for (auto& pt : points) {
            pt.x = unit(rng);
            pt.y = unit(rng);
        }
        std::vector<Edge> edges;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const double dx = points[a].x - points[b].x;
                const double dy = points[a].y - points[b].y;
                if (dx * dx + dy * dy <= r2) edges.emplace_back(a, b);
            }
        }
        NetworkTopology topology(n, std::move(edges), std::move(points));
        if (topology.is_connected()) return topology;
    }
    std::ostringstream msg;
    msg << "no connected geometric topology with n=" << n << ", radius=" << radius << " after "
        << kTopologyRetryBudget << " attempts";
    throw TopologyError(msg.str());
}

CombinationMatrix::CombinationMatrix(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    const auto n = static_cast<std::size_t>(weights_.cols());
    support_.resize(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t l = 0; l < n; ++l) {
            if (weights_(l, col) != 0.0) support_[col].push_back(l);
        }
    }
}

CombinationMatrix::CombinationMatrix(Eigen::MatrixXd weights, const NetworkTopology& topology)
    : CombinationMatrix(std::move(weights)) {
    const auto n = topology.node_count();
    if (static_cast<std::size_t>(weights_.rows()) != n || static_cast<std::size_t>(weights_.cols()) != n)
        throw std::invalid_argument("combination matrix must be N x N");
    for (std::size_t col = 0; col < n; ++col) {
        double sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double w = weights_(l, col);
            if (!(w >= 0.0)) throw std::invalid_argument("combination weights must be nonnegative");
            if (w != 0.0 && l != col && !topology.adjacent(l, col))
                throw std::invalid_argument("combination weight outside neighborhood");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("combination column does not sum to 1");
    }
}

CombinationMatrix CombinationMatrix::identity(std::size_t n) {
    return CombinationMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

CombinationMatrix uniform_combination(const NetworkTopology& topology) {
    const auto n = topology.node_count();
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t col = 0; col < n; ++col) {
        const auto& hood = topology.neighborhood(col);
        const double w = 1.0 / static_cast<double>(hood.size());
        for (auto l : hood) weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(col)) = w;
    }
    return CombinationMatrix(std::move(weights), topology);
}

}  // namespace dplms
