#pragma once

#include "appwatch/dataset.hpp"
#include "appwatch/feature_builder.hpp"
#include "appwatch/learners/metrics.hpp"
#include "appwatch/learners/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace appwatch::learners {

struct FoldAssignment {
    std::vector<std::vector<Eigen::Index>> folds;  ///< each sorted ascending
    bool stratified = true;  ///< false when a class had fewer than k members
};

/// Throws TooFewSamples when n < k or k < 2.
FoldAssignment stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed);

/// Deterministic child seed for fold / tree `index`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct CrossValidation {
    std::vector<EvalMetrics> per_fold;
    EvalMetrics mean;  ///< unweighted; AUC averaged over folds that have it
    bool stratified = true;
};

CrossValidation cross_validate(const LabeledDataset& data, const ModelSpec& spec, int k,
                               std::uint64_t seed);

struct SweepRow {
    std::string model;
    int advance_days = 0;
    EvalMetrics metrics;
};

std::vector<SweepRow> advance_sweep(std::span<const AppBundle> bundles,
                                    const FeatureConfig& config, std::span<const int> k_range,
                                    std::span<const ModelSpec> specs, int folds,
                                    std::uint64_t seed);

/// CSV `model,k,auc,precision,recall,f1,accuracy`.
void write_metrics_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace appwatch::learners
