#include "ghicast/knn.hpp"

#include "ghicast/error.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace ghicast::regress {

double squared_distance(const double* a, const double* b, Index dim)
{
    double lanes[4] = {0.0, 0.0, 0.0, 0.0};
    Index i = 0;
    for (; i + 4 <= dim; i += 4) {
        for (int l = 0; l < 4; ++l) {
            const double d = a[i + l] - b[i + l];
            lanes[l] += d * d;
        }
    }
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        lanes[0] += d * d;
    }
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

namespace {

struct Neighbor {
    double distance;
    std::size_t row;

    bool operator<(const Neighbor& other) const
    {
        return distance < other.distance || (distance == other.distance && row < other.row);
    }
};

// Sorted bounded list of the best K candidates.
class Shortlist {
public:
    explicit Shortlist(std::size_t capacity) : capacity_(capacity) { items_.reserve(capacity + 1); }

    bool full() const { return items_.size() == capacity_; }
    double worst() const { return items_.back().distance; }

    void offer(Neighbor candidate)
    {
        if (full() && !(candidate < items_.back())) {
            return;
        }
        items_.insert(std::upper_bound(items_.begin(), items_.end(), candidate), candidate);
        if (items_.size() > capacity_) {
            items_.pop_back();
        }
    }

    std::vector<std::size_t> rows() const
    {
        std::vector<std::size_t> out;
        out.reserve(items_.size());
        for (const auto& n : items_) {
            out.push_back(n.row);
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<Neighbor> items_;
};

} // namespace

class KdTree {
public:
    explicit KdTree(const RowMatrix& points)
    {
        order_.resize(static_cast<std::size_t>(points.rows()));
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (!order_.empty()) {
            build(points, 0, order_.size());
        }
    }

    void search(const RowMatrix& points, const double* query, Shortlist& best) const
    {
        if (!nodes_.empty()) {
            visit(points, 0, query, best);
        }
    }

private:
    static constexpr std::size_t leaf_size = 8;

    struct Node {
        std::size_t begin, end; // range in order_
        Index dim = -1;         // -1 for leaves
        double split = 0.0;
        std::size_t left = 0, right = 0;
    };

    std::size_t build(const RowMatrix& points, std::size_t begin, std::size_t end)
    {
        const std::size_t id = nodes_.size();
        nodes_.push_back({begin, end});
        if (end - begin <= leaf_size) {
            return id;
        }
        Index best_dim = 0;
        double best_spread = -1.0;
        for (Index d = 0; d < points.cols(); ++d) {
            double lo = points(Index(order_[begin]), d);
            double hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                const double v = points(Index(order_[i]), d);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if (best_spread <= 0.0) {
            return id; // all points identical
        }
        const std::size_t mid = begin + (end - begin) / 2;
        auto key = [&](std::size_t row) { return std::make_pair(points(Index(row), best_dim), row); };
        std::nth_element(order_.begin() + std::ptrdiff_t(begin), order_.begin() + std::ptrdiff_t(mid),
            order_.begin() + std::ptrdiff_t(end), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
        const double split = points(Index(order_[mid]), best_dim);
        const std::size_t left = build(points, begin, mid);
        const std::size_t right = build(points, mid, end);
        nodes_[id].dim = best_dim;
        nodes_[id].split = split;
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void visit(const RowMatrix& points, std::size_t id, const double* query, Shortlist& best) const
    {
        const Node& node = nodes_[id];
        if (node.dim < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t row = order_[i];
                best.offer({squared_distance(query, points.row(Index(row)).data(), points.cols()), row});
            }
            return;
        }
        // Left subtree holds values <= split, right holds values >= split.
        const double diff = query[node.dim] - node.split;
        const std::size_t near = diff <= 0.0 ? node.left : node.right;
        const std::size_t far = diff <= 0.0 ? node.right : node.left;
        visit(points, near, query, best);
        if (!best.full() || diff * diff <= best.worst()) {
            visit(points, far, query, best);
        }
    }

    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

KnnModel::KnnModel(RowMatrix features, TargetVector targets, int neighbors, KnnIndex index)
    : features_(std::move(features)), targets_(std::move(targets)), neighbors_(neighbors)
{
    if (neighbors_ < 1) {
        throw ConfigError("KNN needs K >= 1, got " + std::to_string(neighbors_));
    }
    if (static_cast<std::size_t>(features_.rows()) != targets_.size()) {
        throw ShapeError("KNN: " + std::to_string(features_.rows()) + " feature rows but "
            + std::to_string(targets_.size()) + " targets");
    }
    if (static_cast<Index>(neighbors_) > features_.rows()) {
        throw ConfigError("KNN: K=" + std::to_string(neighbors_) + " exceeds " + std::to_string(features_.rows())
            + " training rows");
    }
    const bool tree = index == KnnIndex::kd_tree || (index == KnnIndex::automatic && features_.cols() <= kd_tree_max_dim);
    if (tree) {
        tree_ = std::make_unique<KdTree>(features_);
    }
}

KnnModel::~KnnModel() = default;
KnnModel::KnnModel(KnnModel&&) noexcept = default;
KnnModel& KnnModel::operator=(KnnModel&&) noexcept = default;

KnnModel::KnnModel(const KnnModel& other)
    : features_(other.features_), targets_(other.targets_), neighbors_(other.neighbors_)
{
    if (other.tree_) {
        tree_ = std::make_unique<KdTree>(features_);
    }
}

KnnModel& KnnModel::operator=(const KnnModel& other)
{
    if (this != &other) {
        KnnModel copy(other);
        *this = std::move(copy);
    }
    return *this;
}

std::vector<std::size_t> KnnModel::nearest(std::span<const double> query) const
{
    if (static_cast<Index>(query.size()) != dim()) {
        throw ShapeError("KNN query has " + std::to_string(query.size()) + " features, model expects "
            + std::to_string(dim()));
    }
    Shortlist best(static_cast<std::size_t>(neighbors_));
    if (tree_) {
        tree_->search(features_, query.data(), best);
    } else {
        for (Index r = 0; r < features_.rows(); ++r) {
            best.offer({squared_distance(query.data(), features_.row(r).data(), dim()), static_cast<std::size_t>(r)});
        }
    }
    return best.rows();
}

PredictionVector KnnModel::predict(const RowMatrix& queries) const
{
    if (queries.cols() != dim()) {
        throw ShapeError("KNN query matrix has " + std::to_string(queries.cols()) + " columns, model expects "
            + std::to_string(dim()));
    }
    PredictionVector out(static_cast<std::size_t>(queries.rows()));
    for (Index q = 0; q < queries.rows(); ++q) {
        const auto rows = nearest({queries.row(q).data(), static_cast<std::size_t>(dim())});
        double sum = 0.0;
        for (std::size_t r : rows) {
            sum += targets_[r];
        }
        out[static_cast<std::size_t>(q)] = sum / static_cast<double>(rows.size());
    }
    return out;
}

KnnModel knn_fit(const FeatureMatrix& x, const TargetVector& y, int neighbors, KnnIndex index)
{
    return KnnModel(x.values, y, neighbors, index);
}

PredictionVector knn_predict(const KnnModel& model, const FeatureMatrix& queries)
{
    return model.predict(queries.values);
}

} // namespace ghicast::regress
