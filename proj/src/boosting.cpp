#include "gbboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gbboost/kernels.hpp"

namespace gbb {

namespace {

constexpr double kEpsClamp = 1e-10;

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    return r;
}

double clamped(double epsilon) {
    return std::min(1.0 - kEpsClamp, std::max(kEpsClamp, epsilon));
}

// R(e) when defined, NaN otherwise — history rows always carry the field.
double loss_factor_or_nan(double epsilon, int k) {
    if (epsilon > 0.0 && epsilon < 1.0) return loss_factor(epsilon, k);
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::samme: return "samme";
        case Algo::rob_samme: return "rob_samme";
        case Algo::gadaboost_sa: return "gadaboost_sa";
    }
    return "?";
}

Algo algo_from_name(const std::string& s) {
    if (s == "samme") return Algo::samme;
    if (s == "rob_samme") return Algo::rob_samme;
    if (s == "gadaboost_sa" || s == "gsa") return Algo::gadaboost_sa;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

double beta(double epsilon, int n_classes) {
    if (n_classes < 2) throw std::invalid_argument("beta: need K >= 2");
    const double e = clamped(epsilon);
    return std::log((1.0 - e) / e) + std::log(static_cast<double>(n_classes - 1));
}

double rob_beta(double epsilon, int n_classes) {
    const double km1 = static_cast<double>(n_classes - 1);
    return km1 * km1 / static_cast<double>(n_classes) * beta(epsilon, n_classes);
}

double subset_error(const std::vector<int>& preds, const std::vector<int>& truth) {
    if (preds.empty() || preds.size() != truth.size())
        throw std::invalid_argument("subset_error: arity mismatch or empty input");
    std::size_t miss = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] != truth[i]) ++miss;
    return static_cast<double>(miss) / static_cast<double>(preds.size());
}

double loss_factor(double epsilon, int n_classes) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("loss_factor: epsilon must be in (0,1)");
    if (n_classes < 2) throw std::invalid_argument("loss_factor: need K >= 2");
    const double invk = 1.0 / static_cast<double>(n_classes);
    return epsilon + (1.0 - epsilon) * std::pow(epsilon / (1.0 - epsilon), invk) *
                         std::pow(1.0 / static_cast<double>(n_classes - 1), invk);
}

TrainedEnsemble samme_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                          SammeTrace* trace) {
    if (iterations < 1) throw std::invalid_argument("samme_fit: need T >= 1");
    if (d.n_classes < 2) throw std::invalid_argument("samme_fit: need K >= 2");

    TrainedEnsemble ens;
    ens.algorithm = Algo::samme;
    ens.n_classes = d.n_classes;
    ens.n_features = d.q;
    ens.spec = spec;
    ens.final_subset_size = d.n;
    ens.stop_reason = "cap reached";

    const auto rows = iota_rows(d.n);
    std::vector<double> w(d.n, 1.0 / static_cast<double>(d.n));

    for (int t = 1; t <= iterations; ++t) {
        Tree model = fit_tree(spec, d, rows, w);
        const std::vector<int> preds = predict(model, d);

        double werr = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            wsum += w[i];
            if (preds[i] != d.labels[i]) werr += w[i];
        }
        const double eps = werr / wsum;
        const double b = beta(eps, d.n_classes);

        IterationRecord rec;
        rec.iteration = t;
        rec.epsilon = eps;
        rec.beta = b;
        rec.subset_size = d.n;
        rec.loss_factor = loss_factor_or_nan(eps, d.n_classes);

        if (trace) trace->models.push_back(model);

        if (b <= 0.0) {
            std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(d.n));
            rec.note = "discarded: beta <= 0, weights reset";
            ens.history.push_back(std::move(rec));
            if (trace) trace->weights.push_back(w);
            continue;
        }

        rec.admitted = true;
        ens.members.push_back(std::move(model));
        ens.betas.push_back(b);

        const double scale = std::exp(b);
        double sum = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            if (preds[i] != d.labels[i]) w[i] *= scale;
            sum += w[i];
        }
        for (double& x : w) x /= sum;
        if (trace) trace->weights.push_back(w);

        if (eps == 0.0) {
            rec.note = "epsilon 0, beta clamped";
            ens.history.push_back(std::move(rec));
            ens.stop_reason = "zero error";
            break;
        }
        ens.history.push_back(std::move(rec));
    }

    if (ens.members.empty())
        throw std::runtime_error("samme_fit: no admissible member after " +
                                 std::to_string(iterations) + " iterations");
    return ens;
}

TrainedEnsemble rob_samme_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                              std::size_t k, RobTrace* trace) {
    if (iterations < 1) throw std::invalid_argument("rob_samme_fit: need T >= 1");
    if (d.n_classes < 2) throw std::invalid_argument("rob_samme_fit: need K >= 2");
    if (k < 1 || k >= d.n) throw std::invalid_argument("rob_samme_fit: need 1 <= k < N");

    TrainedEnsemble ens;
    ens.algorithm = Algo::rob_samme;
    ens.n_classes = d.n_classes;
    ens.n_features = d.q;
    ens.spec = spec;
    ens.final_subset_size = d.n;
    ens.stop_reason = "cap reached";

    // Geometry never changes across iterations, so the neighbour table is
    // computed once; only the per-iteration predictions feed mu.
    const std::vector<std::size_t> knn = knn_table(d, k);
    const auto rows = iota_rows(d.n);
    const double uniform = 1.0 / static_cast<double>(d.n);
    const double guess_bound = static_cast<double>(d.n_classes - 1) /
                               static_cast<double>(d.n_classes);
    std::vector<double> w(d.n, uniform);

    for (int t = 1; t <= iterations; ++t) {
        Tree model = fit_tree(spec, d, rows, w);
        const std::vector<int> preds = predict(model, d);

        double werr = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            wsum += w[i];
            if (preds[i] != d.labels[i]) werr += w[i];
        }
        const double eps = werr / wsum;
        const double b = rob_beta(eps, d.n_classes);

        IterationRecord rec;
        rec.iteration = t;
        rec.epsilon = eps;
        rec.beta = b;
        rec.subset_size = d.n;
        rec.loss_factor = loss_factor_or_nan(eps, d.n_classes);

        if (trace) trace->models.push_back(model);

        if (b > 0.0) {
            rec.admitted = true;
            ens.members.push_back(model);
            ens.betas.push_back(b);
        }

        if (eps > guess_bound || eps == 0.0) {
            // Weak-learnability breach or a perfect fit: start over.
            std::fill(w.begin(), w.end(), uniform);
            rec.note = rec.note.empty() ? "weights reset" : rec.note + "; weights reset";
            if (eps == 0.0) rec.note += " (epsilon 0, beta clamped)";
            ens.history.push_back(std::move(rec));
            if (trace) {
                trace->weights.push_back(w);
                trace->mu.emplace_back();
                trace->noise.emplace_back();
                trace->reset.push_back(1);
            }
            continue;
        }

        // Neighbourhood error rate: fraction of a sample's k neighbours the
        // current model gets wrong. Above-average mu marks a suspect label.
        std::vector<double> mu(d.n, 0.0);
        for (std::size_t i = 0; i < d.n; ++i) {
            std::size_t miss = 0;
            for (std::size_t m = 0; m < k; ++m) {
                const std::size_t j = knn[i * k + m];
                if (preds[j] != d.labels[j]) ++miss;
            }
            mu[i] = static_cast<double>(miss) / static_cast<double>(k);
        }
        double mu_mean = 0.0;
        for (double x : mu) mu_mean += x;
        mu_mean /= static_cast<double>(d.n);

        std::vector<char> noise(d.n, 0);
        for (std::size_t i = 0; i < d.n; ++i) noise[i] = mu[i] > mu_mean ? 1 : 0;

        const double scale = std::exp(b);
        double sum = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            const bool missed = preds[i] != d.labels[i];
            if (missed && !noise[i])
                w[i] *= scale;
            else if (!missed && noise[i])
                w[i] = 0.0;
            sum += w[i];
        }
        if (sum <= 0.0) {
            std::fill(w.begin(), w.end(), uniform);
            rec.note = "all weights zero, reset";
            if (trace) trace->reset.push_back(1);
        } else {
            for (double& x : w) x /= sum;
            if (trace) trace->reset.push_back(0);
        }
        ens.history.push_back(std::move(rec));
        if (trace) {
            trace->weights.push_back(w);
            trace->mu.push_back(std::move(mu));
            trace->noise.push_back(std::move(noise));
        }
    }

    if (ens.members.empty())
        throw std::runtime_error("rob_samme_fit: no admissible member after " +
                                 std::to_string(iterations) + " iterations");
    return ens;
}

TrainedEnsemble gadaboost_sa_fit(const Dataset& d, const LearnerSpec& spec, int iterations,
                                 GsaTrace* trace) {
    if (iterations < 1) throw std::invalid_argument("gadaboost_sa_fit: need T >= 1");

    Granulation g = granulate(d);
    const std::size_t n_balls = g.balls.size();

    std::vector<std::vector<std::size_t>> order(n_balls);
    for (std::size_t b = 0; b < n_balls; ++b) order[b] = ball_boundary_order(g.balls[b]);

    // Initial subset: the farthest-from-center min(floor(capacity/2), q,
    // |ball|) members of every ball.
    const std::size_t per_ball = std::min(g.capacity / 2, d.q);
    std::vector<std::size_t> sampled(n_balls);
    std::size_t retained = 0;
    for (std::size_t b = 0; b < n_balls; ++b) {
        sampled[b] = std::min(per_ball, order[b].size());
        retained += order[b].size();
    }

    auto build_subset = [&]() {
        std::vector<std::size_t> s;
        for (std::size_t b = 0; b < n_balls; ++b)
            s.insert(s.end(), order[b].begin(), order[b].begin() + sampled[b]);
        std::sort(s.begin(), s.end());
        return s;
    };

    TrainedEnsemble ens;
    ens.algorithm = Algo::gadaboost_sa;
    ens.n_classes = d.n_classes;
    ens.n_features = d.q;
    ens.spec = spec;
    ens.stop_reason = "cap reached";

    if (trace) trace->granulation = g;

    std::vector<std::size_t> subset = build_subset();
    for (int t = 1; t <= iterations; ++t) {
        if (trace) trace->subsets.push_back(subset);

        Tree model = fit_tree(spec, d, subset);  // uniform weights by design
        const std::vector<int> preds = predict(model, d, subset);
        std::vector<int> truth(subset.size());
        for (std::size_t i = 0; i < subset.size(); ++i) truth[i] = d.labels[subset[i]];

        const double eps = subset_error(preds, truth);
        const double b = beta(eps, d.n_classes);

        IterationRecord rec;
        rec.iteration = t;
        rec.epsilon = eps;
        rec.beta = b;
        rec.subset_size = subset.size();
        rec.loss_factor = loss_factor_or_nan(eps, d.n_classes);

        if (b > 0.0) {
            rec.admitted = true;
            if (eps == 0.0) rec.note = "epsilon 0, beta clamped";
            ens.members.push_back(std::move(model));
            ens.betas.push_back(b);
        } else {
            rec.note = "excluded: beta <= 0";
        }

        // Balls owning at least one miss drive the growth, admitted or not.
        std::vector<char> impacted(n_balls, 0);
        std::size_t n_impacted = 0;
        for (std::size_t i = 0; i < subset.size(); ++i) {
            if (preds[i] == truth[i]) continue;
            const int ball = g.ball_of[subset[i]];
            if (!impacted[ball]) {
                impacted[ball] = 1;
                ++n_impacted;
            }
        }
        if (trace) trace->impacted.push_back(n_impacted);

        if (n_impacted == 0) {
            ens.history.push_back(std::move(rec));
            ens.stop_reason = "zero error";
            break;
        }

        bool grew = false;
        for (std::size_t b2 = 0; b2 < n_balls; ++b2) {
            if (impacted[b2] && sampled[b2] < order[b2].size()) {
                ++sampled[b2];
                grew = true;
            }
        }
        ens.history.push_back(std::move(rec));
        if (!grew) {
            ens.stop_reason = "subset converged";
            break;
        }
        subset = build_subset();
    }

    ens.final_subset_size = ens.history.back().subset_size;  // last D_t trained on
    if (ens.members.empty())
        throw std::runtime_error("gadaboost_sa_fit: no admissible member after " +
                                 std::to_string(iterations) + " iterations");
    return ens;
}

std::vector<int> predict_ensemble(const TrainedEnsemble& ens, const Dataset& d,
                                  const std::vector<std::size_t>& rows) {
    if (ens.members.empty()) throw std::invalid_argument("predict_ensemble: empty ensemble");
    if (ens.n_features != d.q)
        throw std::invalid_argument("predict_ensemble: feature arity mismatch");
    std::vector<int> out(rows.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for if (rows.size() > 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double* x = d.row(rows[i]);
        std::vector<double> votes(ens.n_classes, 0.0);
        for (std::size_t t = 0; t < ens.members.size(); ++t)
            votes[ens.members[t].predict_row(x)] += ens.betas[t];
        int best = 0;
        for (int c = 1; c < ens.n_classes; ++c)
            if (votes[c] > votes[best]) best = c;  // strict: ties keep the smaller id
        out[i] = best;
    }
    return out;
}

std::vector<int> predict_ensemble(const TrainedEnsemble& ens, const Dataset& d) {
    return predict_ensemble(ens, d, iota_rows(d.n));
}

double staged_loss(const TrainedEnsemble& ens, const Dataset& d,
                   const std::vector<std::size_t>& rows, std::size_t upto) {
    if (upto > ens.members.size())
        throw std::invalid_argument("staged_loss: upto exceeds member count");
    double loss = 0.0;
    for (std::size_t r : rows) {
        const double* x = d.row(r);
        double fy = 0.0;
        for (std::size_t t = 0; t < upto; ++t)
            if (ens.members[t].predict_row(x) == d.labels[r]) fy += ens.betas[t];
        loss += std::exp(-fy / static_cast<double>(ens.n_classes));
    }
    return loss;
}

std::vector<double> staged_loss_curve(const TrainedEnsemble& ens, const Dataset& d,
                                      const std::vector<std::size_t>& rows) {
    std::vector<double> fy(rows.size(), 0.0);
    std::vector<double> curve;
    curve.reserve(ens.members.size() + 1);
    curve.push_back(static_cast<double>(rows.size()));  // exp(0) per sample
    const double k = static_cast<double>(ens.n_classes);
    for (std::size_t t = 0; t < ens.members.size(); ++t) {
        const std::vector<int> preds = predict(ens.members[t], d, rows);
        double loss = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (preds[i] == d.labels[rows[i]]) fy[i] += ens.betas[t];
            loss += std::exp(-fy[i] / k);
        }
        curve.push_back(loss);
    }
    return curve;
}

}  // namespace gbb
