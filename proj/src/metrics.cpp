#include "gbboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace gbb {

Scores score(const std::vector<int>& preds, const std::vector<int>& truth, int n_classes) {
    if (preds.empty() || preds.size() != truth.size())
        throw std::invalid_argument("score: arity mismatch or empty input");
    if (n_classes < 2) throw std::invalid_argument("score: need K >= 2");

    Scores s;
    s.n_classes = n_classes;
    s.confusion.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 0 || preds[i] >= n_classes || truth[i] < 0 || truth[i] >= n_classes)
            throw std::invalid_argument("score: class id out of range");
        ++s.confusion[static_cast<std::size_t>(truth[i]) * n_classes + preds[i]];
    }

    std::size_t diag = 0;
    s.per_class.resize(n_classes);
    double f1_sum = 0.0;
    for (int k = 0; k < n_classes; ++k) {
        std::size_t tp = s.confusion[static_cast<std::size_t>(k) * n_classes + k];
        std::size_t support = 0, predicted = 0;
        for (int c = 0; c < n_classes; ++c) {
            support += s.confusion[static_cast<std::size_t>(k) * n_classes + c];
            predicted += s.confusion[static_cast<std::size_t>(c) * n_classes + k];
        }
        diag += tp;
        ClassScore& cs = s.per_class[k];
        cs.support = support;
        cs.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        cs.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
        cs.f1 = cs.precision + cs.recall > 0.0
                    ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall)
                    : 0.0;
        f1_sum += cs.f1;
    }
    s.accuracy = static_cast<double>(diag) / static_cast<double>(preds.size());
    s.macro_f1 = f1_sum / static_cast<double>(n_classes);
    return s;
}

std::vector<CompareRow> compare(const std::vector<RunRow>& rows, const std::string& reference) {
    using Key = std::tuple<std::string, double, std::uint64_t>;
    std::map<Key, std::vector<const RunRow*>> groups;
    for (const RunRow& r : rows) groups[{r.dataset, r.noise, r.seed}].push_back(&r);

    // (noise, rival, metric) -> counts
    std::map<std::tuple<double, std::string, int>, CompareRow> cells;
    constexpr double kTie = 1e-4;

    for (const auto& [key, members] : groups) {
        const RunRow* ref = nullptr;
        for (const RunRow* r : members)
            if (r->algorithm == reference) ref = r;
        if (!ref || members.size() < 2)
            throw std::invalid_argument(
                "compare: group (" + std::get<0>(key) + ", noise " +
                std::to_string(std::get<1>(key)) + ", seed " +
                std::to_string(std::get<2>(key)) + ") lacks the reference or a rival");
        for (const RunRow* r : members) {
            if (r == ref || r->algorithm == reference) continue;
            for (int metric = 0; metric < 2; ++metric) {
                const double a = metric == 0 ? ref->accuracy : ref->macro_f1;
                const double b = metric == 0 ? r->accuracy : r->macro_f1;
                CompareRow& cell = cells[{std::get<1>(key), r->algorithm, metric}];
                cell.noise = std::get<1>(key);
                cell.rival = r->algorithm;
                cell.metric = metric == 0 ? "accuracy" : "macro_f1";
                if (std::abs(a - b) < kTie)
                    ++cell.tie;
                else if (a > b)
                    ++cell.win;
                else
                    ++cell.loss;
            }
        }
    }

    std::vector<CompareRow> out;
    out.reserve(cells.size());
    for (auto& [k, v] : cells) out.push_back(std::move(v));
    return out;
}

}  // namespace gbb
