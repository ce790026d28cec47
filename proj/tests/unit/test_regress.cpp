#include "ghicast/error.hpp"
#include "ghicast/random.hpp"
#include "ghicast/regress.hpp"

#include "../oracles.hpp"
#include "../support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

using namespace ghicast;
using namespace ghicast::regress;

namespace {

RowMatrix random_points(Index rows, Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    RowMatrix x(rows, cols);
    for (Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.uniform();
    }
    return x;
}

TargetVector random_targets(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    TargetVector y(n);
    for (auto& v : y) {
        v = 1000.0 * rng.uniform();
    }
    return y;
}

RowMatrix row_of(std::initializer_list<double> values)
{
    RowMatrix r(1, Index(values.size()));
    Index c = 0;
    for (double v : values) {
        r(0, c++) = v;
    }
    return r;
}

double mse(const PredictionVector& p, const TargetVector& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += (p[i] - y[i]) * (p[i] - y[i]);
    }
    return s / double(y.size());
}

} // namespace

TEST_CASE("KNN stores its inputs verbatim")
{
    const RowMatrix x = random_points(3, 4, 1);
    const TargetVector y = {1, 2, 3};
    const KnnModel m(x, y, 2);
    CHECK(m.features() == x);
    CHECK(m.targets() == y);
    CHECK(m.neighbors() == 2);
}

TEST_CASE("KNN preconditions")
{
    const RowMatrix x = random_points(3, 4, 1);
    CHECK_THROWS_AS(KnnModel(x, {1, 2, 3}, 0), ConfigError);
    CHECK_THROWS_AS(KnnModel(x, {1, 2, 3}, 4), ConfigError);
    CHECK_THROWS_AS(KnnModel(x, {1, 2}, 1), ShapeError);
    const KnnModel m(x, {1, 2, 3}, 1);
    CHECK_THROWS_AS(m.predict(random_points(2, 5, 1)), ShapeError);
}

TEST_CASE("KNN exact hit and equidistant pair")
{
    const KnnModel single(row_of({0.3, 0.7}), {100.0}, 1);
    CHECK(single.predict(row_of({0.3, 0.7}))[0] == 100.0);

    RowMatrix two(2, 1);
    two << 0.0, 2.0;
    const KnnModel pair(two, {100.0, 200.0}, 2);
    CHECK(pair.predict(row_of({1.0}))[0] == 150.0);
}

TEST_CASE("KNN ties go to the lower training row")
{
    RowMatrix x(3, 1);
    x << -1.0, 1.0, 1.0;
    for (auto index : {KnnIndex::brute_force, KnnIndex::kd_tree}) {
        const KnnModel m(x, {10.0, 20.0, 30.0}, 1, index);
        const auto first = m.nearest(std::vector<double>{0.0});
        CHECK(first == std::vector<std::size_t>{0});
        const auto right = m.nearest(std::vector<double>{1.0});
        CHECK(right == std::vector<std::size_t>{1});
    }
}

TEST_CASE("KNN with K = rows predicts the training mean")
{
    const RowMatrix x = random_points(25, 3, 2);
    TargetVector y(25);
    std::iota(y.begin(), y.end(), 1.0);
    const KnnModel m(x, y, 25);
    double mean = 0.0;
    for (std::size_t r : m.nearest(std::vector<double>{0.5, 0.5, 0.5})) {
        mean += y[r];
    }
    mean /= 25.0;
    for (double p : m.predict(random_points(10, 3, 3))) {
        CHECK(p == mean);
        CHECK(p == doctest::Approx(13.0));
    }
}

TEST_CASE("KNN matches exhaustive search on 200 random points")
{
    const RowMatrix x = random_points(200, 6, 4);
    const TargetVector y = random_targets(200, 5);
    const RowMatrix q = random_points(100, 6, 6);
    for (auto index : {KnnIndex::automatic, KnnIndex::brute_force, KnnIndex::kd_tree}) {
        const KnnModel m(x, y, 2, index);
        const auto p = m.predict(q);
        for (Index i = 0; i < q.rows(); ++i) {
            CHECK(p[std::size_t(i)] == oracle::brute_knn_predict(x, y, q.row(i).data(), 2));
        }
    }
}

TEST_CASE("kd-tree neighbour sets equal exhaustive sets, including lattice ties")
{
    Rng rng(12);
    RowMatrix lattice(500, 3);
    for (Index i = 0; i < lattice.size(); ++i) {
        lattice.data()[i] = double(rng.index(4));
    }
    for (const RowMatrix* x : {&lattice}) {
        const TargetVector y = random_targets(std::size_t(x->rows()), 13);
        const KnnModel tree(*x, y, 5, KnnIndex::kd_tree);
        const KnnModel brute(*x, y, 5, KnnIndex::brute_force);
        REQUIRE(tree.uses_tree());
        REQUIRE_FALSE(brute.uses_tree());
        for (int qi = 0; qi < 200; ++qi) {
            std::vector<double> query = {double(rng.index(5)) - 0.5, double(rng.index(4)), rng.uniform() * 3};
            CHECK(tree.nearest(query) == brute.nearest(query));
        }
    }
}

TEST_CASE("automatic index switches on dimension")
{
    CHECK(KnnModel(random_points(10, kd_tree_max_dim, 1), TargetVector(10, 0.0), 2).uses_tree());
    CHECK_FALSE(KnnModel(random_points(10, kd_tree_max_dim + 1, 1), TargetVector(10, 0.0), 2).uses_tree());
}

TEST_CASE("features per split is ceil(sqrt(d))")
{
    const ForestConfig config;
    CHECK(features_per_split(config, 20) == 5);
    CHECK(features_per_split(config, 3072) == 56);
    CHECK(features_per_split(config, 1) == 1);
    CHECK(features_per_split(config, 16) == 4);
    ForestConfig fixed;
    fixed.max_features = 3;
    CHECK(features_per_split(fixed, 100) == 3);
}

TEST_CASE("bootstrap draws depend only on seed, tree and n")
{
    const auto a = bootstrap_rows(50, 9, 3);
    CHECK(a == bootstrap_rows(50, 9, 3));
    CHECK(a != bootstrap_rows(50, 9, 4));
    CHECK(a.size() == 50);
    for (std::size_t r : a) {
        CHECK(r < 50);
    }
}

TEST_CASE("zero-variance targets give constant predictions")
{
    const RowMatrix x = random_points(40, 5, 7);
    ForestConfig config;
    config.n_trees = 20;
    const ForestModel forest = rf_fit(x, TargetVector(40, 321.5), config);
    for (double p : forest.predict(random_points(30, 5, 8))) {
        CHECK(p == 321.5);
    }
}

TEST_CASE("forest predictions stay inside the training target range")
{
    const RowMatrix x = random_points(60, 4, 9);
    const TargetVector y = random_targets(60, 10);
    ForestConfig config;
    config.n_trees = 30;
    const ForestModel forest = rf_fit(x, y, config);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    RowMatrix q = random_points(300, 4, 11);
    q *= 3.0;
    q.array() -= 1.0;
    for (double p : forest.predict(q)) {
        CHECK(p >= *lo);
        CHECK(p <= *hi);
    }
}

TEST_CASE("forest is reproducible across runs and thread counts")
{
    const RowMatrix x = random_points(80, 6, 14);
    const TargetVector y = random_targets(80, 15);
    ForestConfig config;
    config.n_trees = 25;
    config.seed = 3;
    const ForestModel a = rf_fit(x, y, config);
    const ForestModel b = rf_fit(x, y, config);
    config.threads = 4;
    const ForestModel c = rf_fit(x, y, config);
    const RowMatrix q = random_points(50, 6, 16);
    CHECK(a.predict(q) == b.predict(q));
    CHECK(a.predict(q) == c.predict(q));
    REQUIRE(a.trees().size() == c.trees().size());
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        REQUIRE(a.trees()[t].nodes.size() == c.trees()[t].nodes.size());
        for (std::size_t n = 0; n < a.trees()[t].nodes.size(); ++n) {
            CHECK(a.trees()[t].nodes[n].feature == c.trees()[t].nodes[n].feature);
            CHECK(a.trees()[t].nodes[n].threshold == c.trees()[t].nodes[n].threshold);
            CHECK(a.trees()[t].nodes[n].value == c.trees()[t].nodes[n].value);
        }
    }
}

TEST_CASE("depth-1 forest on a step function beats the constant mean")
{
    RowMatrix x(100, 1);
    TargetVector y(100);
    for (int i = 0; i < 100; ++i) {
        x(i, 0) = (i + 0.5) / 100.0;
        y[std::size_t(i)] = x(i, 0) < 0.5 ? 0.0 : 100.0;
    }
    ForestConfig config;
    config.n_trees = 50;
    config.max_depth = 1;
    const ForestModel forest = rf_fit(x, y, config);
    for (const auto& tree : forest.trees()) {
        CHECK(tree.depth() <= 1);
    }
    for (double p : forest.predict(x)) {
        CHECK(p >= 0.0);
        CHECK(p <= 100.0);
    }
    RowMatrix test(200, 1);
    TargetVector truth(200);
    for (int i = 0; i < 200; ++i) {
        test(i, 0) = (i + 0.25) / 200.0;
        truth[std::size_t(i)] = test(i, 0) < 0.5 ? 0.0 : 100.0;
    }
    const double baseline = mse(PredictionVector(200, 50.0), truth);
    // One split at the step is the analytic optimum; it removes all error.
    CHECK(mse(forest.predict(test), truth) < baseline / 4.0);
}

TEST_CASE("stump ensemble of constants predicts the constant")
{
    DecisionTree stump;
    stump.nodes = {{0, 0.5, 1, 2, 0.0}, {-1, 0.0, -1, -1, 50.0}, {-1, 0.0, -1, -1, 50.0}};
    const ForestModel forest(std::vector<DecisionTree>(7, stump), 1);
    CHECK(forest.predict(row_of({0.1}))[0] == 50.0);
    CHECK(forest.predict(row_of({0.9}))[0] == 50.0);
}

TEST_CASE("forest prediction equals the mean of hand-traced leaves")
{
    const RowMatrix x = random_points(50, 3, 17);
    const TargetVector y = random_targets(50, 18);
    ForestConfig config;
    config.n_trees = 10;
    const ForestModel forest = rf_fit(x, y, config);
    const RowMatrix q = random_points(20, 3, 19);
    const auto p = forest.predict(q);
    for (Index i = 0; i < q.rows(); ++i) {
        double sum = 0.0;
        for (const auto& tree : forest.trees()) {
            sum += oracle::trace_tree(tree, q.row(i).data());
        }
        CHECK(p[std::size_t(i)] == doctest::Approx(sum / 10.0).epsilon(1e-12));
    }
}

TEST_CASE("leaves respect min_samples_leaf and depth respects max_depth")
{
    const RowMatrix x = random_points(120, 4, 20);
    const TargetVector y = random_targets(120, 21);
    ForestConfig config;
    config.n_trees = 8;
    config.min_samples_leaf = 5;
    config.max_depth = 6;
    config.seed = 2;
    const ForestModel forest = rf_fit(x, y, config);
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        const auto& tree = forest.trees()[t];
        CHECK(tree.depth() <= 6);
        // Route the tree's own bootstrap sample and count arrivals per leaf.
        std::map<const TreeNode*, int> arrivals;
        for (std::size_t r : bootstrap_rows(120, config.seed, t)) {
            int node = 0;
            while (tree.nodes[std::size_t(node)].feature >= 0) {
                const auto& n = tree.nodes[std::size_t(node)];
                node = x(Index(r), n.feature) <= n.threshold ? n.left : n.right;
            }
            ++arrivals[&tree.nodes[std::size_t(node)]];
        }
        for (const auto& node : tree.nodes) {
            if (node.feature < 0) {
                CHECK(arrivals[&node] >= 5);
            }
        }
    }
}

TEST_CASE("tree growth ignores training-row order")
{
    const RowMatrix x = random_points(40, 3, 22);
    const TargetVector y = random_targets(40, 23);
    std::vector<std::size_t> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(24);
    rng.shuffle(perm);
    RowMatrix xp(40, 3);
    TargetVector yp(40);
    std::vector<std::size_t> where(40);
    for (std::size_t i = 0; i < 40; ++i) {
        xp.row(Index(i)) = x.row(Index(perm[i]));
        yp[i] = y[perm[i]];
        where[perm[i]] = i;
    }
    const ForestConfig config;
    const auto rows = bootstrap_rows(40, 1, 0);
    std::vector<std::size_t> mapped;
    for (std::size_t r : rows) {
        mapped.push_back(where[r]);
    }
    const DecisionTree a = grow_tree(x, y, rows, config, 99);
    const DecisionTree b = grow_tree(xp, yp, mapped, config, 99);
    const RowMatrix q = random_points(60, 3, 25);
    for (Index i = 0; i < q.rows(); ++i) {
        CHECK(a.predict(q.row(i).data()) == b.predict(q.row(i).data()));
    }
}

TEST_CASE("forest preconditions")
{
    CHECK_THROWS_AS(rf_fit(RowMatrix(0, 3), {}), ConfigError);
    CHECK_THROWS_AS(rf_fit(random_points(1, 3, 1), {1.0}), ConfigError);
    CHECK_THROWS_AS(rf_fit(random_points(3, 3, 1), {1.0, 2.0}), ShapeError);
    ForestConfig config;
    config.n_trees = 2;
    const ForestModel forest = rf_fit(random_points(5, 3, 1), {1, 2, 3, 4, 5}, config);
    CHECK_THROWS_AS(forest.predict(random_points(1, 2, 1)), ShapeError);
}

TEST_CASE("regressor variant dispatch")
{
    const RowMatrix x = random_points(30, 2, 26);
    const TargetVector y = random_targets(30, 27);
    RegressorConfig config;
    const Regressor knn = fit_regressor(x, y, config);
    CHECK(std::holds_alternative<KnnModel>(knn));
    config.kind = RegressorKind::forest;
    config.forest.n_trees = 5;
    const Regressor rf = fit_regressor(x, y, config);
    CHECK(std::holds_alternative<ForestModel>(rf));
    CHECK(predict(rf, x).size() == 30);
    CHECK(parse_kind("rf") == RegressorKind::forest);
    CHECK(kind_name(RegressorKind::knn) == "knn");
    CHECK_THROWS_AS(parse_kind("svm"), ConfigError);
}

TEST_CASE("persistence repeats the anchor value")
{
    const std::vector<double> anchors = {600.0, 0.0, 123.4};
    CHECK(persistence_predict(anchors) == anchors);

    std::vector<ingest::AlignedSample> history;
    for (const auto t : testing::regular_times(10)) {
        history.push_back({t, {t, "", 0}, 400.0});
    }
    const std::vector<Timestamp> queries = {history[2].timestamp, history[5].timestamp};
    for (int h : {0, 6}) {
        const auto p = persistence_predict(history, queries, h);
        CHECK(p == PredictionVector{400.0, 400.0});
    }
    const std::vector<Timestamp> missing = {history[2].timestamp + Seconds{60}};
    CHECK_THROWS_AS(persistence_predict(history, missing, 1), ConfigError);
}
