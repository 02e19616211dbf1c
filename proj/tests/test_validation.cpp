#include "appwatch/learners/validation.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace appwatch;
using namespace appwatch::learners;
using testing_support::day;
using testing_support::error_code_of;

namespace {

LabeledDataset blobs(std::mt19937_64& rng, int n_pos, int n_neg, double gap)
{
    std::normal_distribution<double> g(0, 1);
    LabeledDataset ds;
    const int n = n_pos + n_neg;
    ds.features.resize(n, 3);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) ds.labels(i) = i < n_pos ? 1 : 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) ds.features(i, j) = g(rng) + (ds.labels(i) ? gap : 0.0);
    }
    return ds;
}

}  // namespace

TEST(Folds, ExactDivisibility)
{
    Eigen::VectorXi y(20);
    for (int i = 0; i < 20; ++i) y(i) = i < 10 ? 1 : 0;
    auto f = stratified_kfold(y, 10, 3);
    ASSERT_EQ(f.folds.size(), 10u);
    EXPECT_TRUE(f.stratified);
    for (const auto& fold : f.folds) {
        ASSERT_EQ(fold.size(), 2u);
        EXPECT_EQ(y(fold[0]) + y(fold[1]), 1);
    }
}

TEST(Folds, PartitionAndBalance)
{
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 20 + static_cast<int>(rng() % 200);
        const int k = 2 + static_cast<int>(rng() % 9);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i) y(i) = rng() % 3 == 0 ? 1 : 0;
        y.head(k).setOnes();
        y.tail(k).setZero();
        auto f = stratified_kfold(y, k, rep);
        ASSERT_TRUE(f.stratified);
        std::set<Eigen::Index> seen;
        for (const auto& fold : f.folds) {
            EXPECT_TRUE(std::is_sorted(fold.begin(), fold.end()));
            for (auto i : fold) EXPECT_TRUE(seen.insert(i).second);
        }
        EXPECT_EQ(static_cast<int>(seen.size()), n);
        for (int cls = 0; cls < 2; ++cls) {
            const double per_fold = static_cast<double>((y.array() == cls).count()) / k;
            for (const auto& fold : f.folds) {
                const auto c = std::count_if(fold.begin(), fold.end(), [&](Eigen::Index i) { return y(i) == cls; });
                EXPECT_LE(std::abs(static_cast<double>(c) - per_fold), 1.0);
            }
        }
        EXPECT_EQ(stratified_kfold(y, k, rep).folds, f.folds);
    }
}

TEST(Folds, DegradesAndErrors)
{
    Eigen::VectorXi y(12);
    y << 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0;
    auto f = stratified_kfold(y, 5, 1);
    EXPECT_FALSE(f.stratified);
    std::size_t total = 0;
    for (const auto& fold : f.folds) total += fold.size();
    EXPECT_EQ(total, 12u);
    EXPECT_EQ(error_code_of([&] { stratified_kfold(y, 13, 1); }), Errc::TooFewSamples);
    EXPECT_EQ(error_code_of([&] { stratified_kfold(y, 1, 1); }), Errc::TooFewSamples);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(CrossValidation, ConstantModelHasHalfAuc)
{
    std::mt19937_64 rng(67);
    auto ds = blobs(rng, 30, 30, 3.0);
    ds.features.setConstant(1.0);
    auto cv = cross_validate(ds, ModelSpec::defaults("knn"), 5, 1);
    ASSERT_TRUE(cv.mean.auc);
    EXPECT_DOUBLE_EQ(*cv.mean.auc, 0.5);
    EXPECT_EQ(cv.per_fold.size(), 5u);
}

TEST(CrossValidation, SeparableForest)
{
    std::mt19937_64 rng(71);
    auto ds = blobs(rng, 60, 60, 4.0);
    ModelSpec rf = ModelSpec::defaults("rf");
    std::get<ForestParams>(rf.params).n_trees = 30;
    auto cv = cross_validate(ds, rf, 10, 4);
    EXPECT_GT(*cv.mean.auc, 0.95);
    auto again = cross_validate(ds, rf, 10, 4);
    EXPECT_EQ(*again.mean.auc, *cv.mean.auc);
    EXPECT_EQ(again.mean.f1, cv.mean.f1);
}

TEST(Sweep, KZeroMatchesCrossValidate)
{
    std::mt19937_64 rng(73);
    std::vector<AppBundle> bundles;
    for (int i = 0; i < 40; ++i) {
        AppBundle b;
        b.app = testing_support::record("a" + std::to_string(i));
        b.label = i % 2 == 0;
        b.reference_date = b.data_cutoff = day(40);
        const int n = b.label ? 90 : 30;
        for (int r = 0; r < n; ++r) {
            const int d = 40 - static_cast<int>(rng() % 20);
            b.reviews.push_back(testing_support::review(b.app.app_id, "u" + std::to_string(r), day(d),
                                                        b.label ? 5 : 1 + static_cast<int>(rng() % 5),
                                                        b.label && r % 2 ? "same text" : "t" + std::to_string(rng())));
        }
        bundles.push_back(b);
    }
    const std::vector<int> ks = {0, 3};
    const std::vector<ModelSpec> specs = {ModelSpec::defaults("lr"), ModelSpec::defaults("tree")};
    auto rows = advance_sweep(bundles, FeatureConfig{}, ks, specs, 5, 11);
    ASSERT_EQ(rows.size(), 4u);
    auto ds = build_dataset(bundles, FeatureConfig{}, 0);
    for (std::size_t s = 0; s < specs.size(); ++s) {
        auto cv = cross_validate(ds.data, specs[s], 5, 11);
        const auto& row = *std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
            return r.advance_days == 0 && r.model == specs[s].name();
        });
        EXPECT_EQ(row.metrics.auc, cv.mean.auc);
        EXPECT_EQ(row.metrics.f1, cv.mean.f1);
        EXPECT_EQ(row.metrics.accuracy, cv.mean.accuracy);
    }
    std::ostringstream out;
    write_metrics_csv(out, rows);
    const std::string csv = out.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,k,auc,precision,recall,f1,accuracy");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
