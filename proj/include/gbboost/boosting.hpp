#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gbboost/dataset.hpp"
#include "gbboost/granulation.hpp"
#include "gbboost/tree.hpp"

namespace gbb {

enum class Algo { samme, rob_samme, gadaboost_sa };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& s);  // throws on unknown names

// One line per boosting iteration, admitted or not.
struct IterationRecord {
    int iteration = 0;            // 1-based
    double epsilon = 0.0;
    double beta = 0.0;
    std::size_t subset_size = 0;  // |D_t| (the full set for samme/rob_samme)
    double loss_factor = 0.0;     // R(epsilon); NaN outside (0,1)
    bool admitted = false;
    std::string note;
};

struct TrainedEnsemble {
    Algo algorithm = Algo::samme;
    int n_classes = 0;
    std::size_t n_features = 0;
    LearnerSpec spec;
    std::vector<Tree> members;        // only admitted models, beta > 0 each
    std::vector<double> betas;        // aligned with members
    std::vector<IterationRecord> history;
    std::string stop_reason;          // zero error | subset converged | cap reached
    std::size_t final_subset_size = 0;
    NormParams norm;                  // empty unless the caller attaches one
};

// ln((1-e)/e) + ln(K-1) with e clamped to [1e-10, 1-1e-10].
double beta(double epsilon, int n_classes);

// The rob_samme variant: ((K-1)^2 / K) * beta(epsilon, K).
double rob_beta(double epsilon, int n_classes);

// Unweighted misclassification fraction.
double subset_error(const std::vector<int>& preds, const std::vector<int>& truth);

// Per-iteration loss contraction factor
//   R(e) = e + (1-e) * (e/(1-e))^(1/K) * (1/(K-1))^(1/K),
// defined on 0 < e < 1; R((K-1)/K) = 1 and R < 1 below it.
double loss_factor(double epsilon, int n_classes);

// Optional per-iteration capture for tests; every fit ignores a null trace.
struct SammeTrace {
    std::vector<std::vector<double>> weights;  // after each update
    std::vector<Tree> models;                  // fitted model per iteration
};

struct RobTrace {
    std::vector<std::vector<double>> weights;
    std::vector<Tree> models;
    std::vector<std::vector<double>> mu;       // neighborhood error rates
    std::vector<std::vector<char>> noise;      // flags: mu above its mean
    std::vector<char> reset;                   // weight reset fired
};

struct GsaTrace {
    Granulation granulation;
    std::vector<std::vector<std::size_t>> subsets;  // D_t per iteration, sorted
    std::vector<std::size_t> impacted;              // |I_t| per iteration
};

// Multiclass AdaBoost on the full set with weighted fits; iterations whose
// beta is not positive are discarded and the weights reset to uniform.
TrainedEnsemble samme_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                          SammeTrace* trace = nullptr);

// Noise-aware variant: k-nearest-neighbour error rates flag suspect samples,
// which are exempted from upweighting and zeroed when correctly classified.
TrainedEnsemble rob_samme_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                              std::size_t k, RobTrace* trace = nullptr);

// Granular-ball variant: uniform-weight fits on a growing boundary subset,
// one new boundary sample per misclassified ball per iteration.
TrainedEnsemble gadaboost_sa_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                                 GsaTrace* trace = nullptr);

// argmax_k of the beta-weighted vote sum; ties to the lowest class id.
std::vector<int> predict_ensemble(const TrainedEnsemble& ens, const Dataset& d);
std::vector<int> predict_ensemble(const TrainedEnsemble& ens, const Dataset& d,
                                  const std::vector<std::size_t>& rows);

// Multiclass exponential loss of the first `upto` members over the rows:
// sum_i exp(-f^{y_i}(x_i) / K), f^y = sum_t beta_t * I(h_t(x) = y).
double staged_loss(const TrainedEnsemble& ens, const Dataset& d,
                   const std::vector<std::size_t>& rows, std::size_t upto);

// staged_loss for every prefix 0..|members|, predicting each member once.
std::vector<double> staged_loss_curve(const TrainedEnsemble& ens, const Dataset& d,
                                      const std::vector<std::size_t>& rows);

}  // namespace gbb
