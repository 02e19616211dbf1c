#include "appwatch/learners/validation.hpp"

#include "appwatch/csv.hpp"
#include "appwatch/error.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

namespace appwatch::learners {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    // splitmix64 finalizer over (master, index)
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

FoldAssignment stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed)
{
    const Eigen::Index n = labels.size();
    if (k < 2) throw Error(Errc::TooFewSamples, "k must be >= 2");
    if (n < k) throw Error(Errc::TooFewSamples, std::to_string(n) + " samples for " + std::to_string(k) + " folds");

    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> by_class[2];
    for (Eigen::Index i = 0; i < n; ++i) by_class[labels(i) == 1 ? 1 : 0].push_back(i);

    FoldAssignment out;
    out.folds.resize(static_cast<std::size_t>(k));
    const auto small_class = [&](const std::vector<Eigen::Index>& c) {
        return !c.empty() && c.size() < static_cast<std::size_t>(k);
    };
    out.stratified = !small_class(by_class[0]) && !small_class(by_class[1]);

    std::size_t next = 0;
    if (out.stratified) {
        // Deal each class round-robin, continuing where the previous class stopped
        // so fold sizes also stay within one of each other.
        for (auto& members : by_class) {
            std::shuffle(members.begin(), members.end(), rng);
            for (auto i : members) out.folds[next++ % static_cast<std::size_t>(k)].push_back(i);
        }
    } else {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        std::shuffle(all.begin(), all.end(), rng);
        for (auto i : all) out.folds[next++ % static_cast<std::size_t>(k)].push_back(i);
    }
    for (auto& f : out.folds) std::sort(f.begin(), f.end());
    return out;
}

CrossValidation cross_validate(const LabeledDataset& data, const ModelSpec& spec, int k,
                               std::uint64_t seed)
{
    data.validate();
    const FoldAssignment assignment = stratified_kfold(data.labels, k, seed);
    CrossValidation cv;
    cv.stratified = assignment.stratified;

    std::vector<int> fold_of(static_cast<std::size_t>(data.rows()));
    for (std::size_t f = 0; f < assignment.folds.size(); ++f) {
        for (auto i : assignment.folds[f]) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(f);
    }

    double auc_sum = 0.0;
    int auc_folds = 0;
    for (std::size_t f = 0; f < assignment.folds.size(); ++f) {
        std::vector<Eigen::Index> train_rows;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (fold_of[static_cast<std::size_t>(i)] != static_cast<int>(f)) train_rows.push_back(i);
        }
        const LabeledDataset train_set = data.subset(train_rows);
        const LabeledDataset test_set = data.subset(assignment.folds[f]);
        const Model model = train(train_set, spec.with_seed(derive_seed(seed, f)));
        const EvalMetrics m = evaluate_metrics(test_set.labels, model.predict_scores(test_set.features));
        cv.per_fold.push_back(m);

        cv.mean.precision += m.precision;
        cv.mean.recall += m.recall;
        cv.mean.f1 += m.f1;
        cv.mean.accuracy += m.accuracy;
        if (m.auc) {
            auc_sum += *m.auc;
            ++auc_folds;
        }
    }
    const double folds = static_cast<double>(cv.per_fold.size());
    cv.mean.precision /= folds;
    cv.mean.recall /= folds;
    cv.mean.f1 /= folds;
    cv.mean.accuracy /= folds;
    if (auc_folds > 0) cv.mean.auc = auc_sum / auc_folds;
    return cv;
}

std::vector<SweepRow> advance_sweep(std::span<const AppBundle> bundles,
                                    const FeatureConfig& config, std::span<const int> k_range,
                                    std::span<const ModelSpec> specs, int folds,
                                    std::uint64_t seed)
{
    std::vector<SweepRow> rows;
    for (int k : k_range) {
        const FeatureDataset ds = build_dataset(bundles, config, k);
        for (const auto& spec : specs) {
            rows.push_back({spec.name(), k, cross_validate(ds.data, spec, folds, seed).mean});
        }
    }
    return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "model,k,auc,precision,recall,f1,accuracy\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.advance_days << ','
            << (r.metrics.auc ? csv::number(*r.metrics.auc) : std::string()) << ','
            << csv::number(r.metrics.precision) << ',' << csv::number(r.metrics.recall) << ','
            << csv::number(r.metrics.f1) << ',' << csv::number(r.metrics.accuracy) << '\n';
    }
}

}  // namespace appwatch::learners
