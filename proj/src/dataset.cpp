#include "gbboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gbb {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// One line -> fields. Comma-delimited when a comma is present, otherwise
// whitespace-delimited.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    if (line.find(',') != std::string::npos) {
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                out.push_back(trim(line.substr(start)));
                break;
            }
            out.push_back(trim(line.substr(start, pos - start)));
            start = pos + 1;
        }
    } else {
        std::istringstream iss(line);
        std::string tok;
        while (iss >> tok) out.push_back(tok);
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_int(const std::string& s, long& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Line classification and label-column resolution shared by the parser and
// the raw-layout scanner.
struct ScannedRows {
    std::vector<std::vector<std::string>> rows;  // retained lines, split
    std::vector<std::size_t> line_nos;           // 1-based physical line numbers
    std::size_t arity = 0;
    long label_idx = -1;
    std::size_t first_data = 0;                  // index into rows
};

ScannedRows scan_rows(const std::string& text, const std::string& label_col,
                      const std::string& origin) {
    ScannedRows s;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '@' || t[0] == '%' || t[0] == '#') continue;
        s.rows.push_back(split_fields(t));
        s.line_nos.push_back(line_no);
    }
    if (s.rows.empty()) throw std::runtime_error(origin + ": no data rows");

    s.arity = s.rows[0].size();
    for (std::size_t r = 1; r < s.rows.size(); ++r) {
        if (s.rows[r].size() != s.arity)
            throw std::runtime_error(origin + ": ragged row at line " +
                                     std::to_string(s.line_nos[r]) + " (" +
                                     std::to_string(s.rows[r].size()) + " cells, expected " +
                                     std::to_string(s.arity) + ")");
    }
    if (s.arity < 2) throw std::runtime_error(origin + ": need at least one feature column");

    // Resolve the label column. A name forces the first row to be a header;
    // otherwise the first row is a header iff some non-label cell is not a
    // number.
    const std::string spec = trim(label_col);
    bool header = false;
    long as_int = 0;
    if (spec.empty()) {
        s.label_idx = static_cast<long>(s.arity) - 1;
    } else if (parse_int(spec, as_int)) {
        s.label_idx = as_int == -1 ? static_cast<long>(s.arity) - 1 : as_int;
        if (s.label_idx < 0 || s.label_idx >= static_cast<long>(s.arity))
            throw std::runtime_error(origin + ": label column " + spec + " out of range for " +
                                     std::to_string(s.arity) + " columns");
    } else {
        header = true;
        auto it = std::find(s.rows[0].begin(), s.rows[0].end(), spec);
        if (it == s.rows[0].end())
            throw std::runtime_error(origin + ": label column '" + spec + "' not in header");
        s.label_idx = static_cast<long>(it - s.rows[0].begin());
    }
    if (!header) {
        double tmp;
        for (std::size_t c = 0; c < s.arity; ++c) {
            if (static_cast<long>(c) == s.label_idx) continue;
            if (!parse_double(s.rows[0][c], tmp)) {
                header = true;
                break;
            }
        }
    }

    s.first_data = header ? 1 : 0;
    if (s.first_data >= s.rows.size())
        throw std::runtime_error(origin + ": header but no data rows");
    return s;
}

}  // namespace

Dataset parse_dataset(const std::string& text, const std::string& label_col,
                      const std::string& origin) {
    ScannedRows scan = scan_rows(text, label_col, origin);
    const auto& rows = scan.rows;
    const auto& line_nos = scan.line_nos;
    const std::size_t arity = scan.arity;
    const long label_idx = scan.label_idx;
    const bool header = scan.first_data == 1;
    const std::size_t first_data = scan.first_data;

    Dataset d;
    d.n = rows.size() - first_data;
    d.q = arity - 1;
    d.features.resize(d.n * d.q);
    d.labels.resize(d.n);
    if (header) {
        for (std::size_t c = 0; c < arity; ++c)
            if (static_cast<long>(c) != label_idx) d.feature_names.push_back(rows[0][c]);
    }

    std::vector<std::string> raw_labels(d.n);
    for (std::size_t r = 0; r < d.n; ++r) {
        const auto& cells = rows[first_data + r];
        std::size_t col = 0;
        for (std::size_t c = 0; c < arity; ++c) {
            if (static_cast<long>(c) == label_idx) {
                raw_labels[r] = cells[c];
                continue;
            }
            double v;
            if (!parse_double(cells[c], v) || !std::isfinite(v))
                throw std::runtime_error(origin + ": non-numeric feature cell '" + cells[c] +
                                         "' at line " + std::to_string(line_nos[first_data + r]));
            d.features[r * d.q + col++] = v;
        }
        if (raw_labels[r].empty())
            throw std::runtime_error(origin + ": empty label at line " +
                                     std::to_string(line_nos[first_data + r]));
    }

    // Contiguous ids ordered by the original label representation: numeric
    // order when every label parses as a number, string order otherwise.
    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    std::vector<std::string> order(distinct.begin(), distinct.end());
    bool all_numeric = true;
    for (const auto& s : order) {
        double v;
        if (!parse_double(s, v)) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric) {
        std::sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
            double va, vb;
            parse_double(a, va);
            parse_double(b, vb);
            return va != vb ? va < vb : a < b;
        });
    }
    if (order.size() < 2) throw std::runtime_error(origin + ": needs at least two classes");

    std::map<std::string, int> id;
    for (std::size_t k = 0; k < order.size(); ++k) id[order[k]] = static_cast<int>(k);
    for (std::size_t r = 0; r < d.n; ++r) d.labels[r] = id[raw_labels[r]];
    d.n_classes = static_cast<int>(order.size());
    d.class_names = std::move(order);
    return d;
}

Dataset load_dataset(const std::string& path, const std::string& label_col) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_dataset(buf.str(), label_col, path);
}

RawLayout scan_layout(const std::string& text, const std::string& label_col,
                      const std::string& origin) {
    ScannedRows scan = scan_rows(text, label_col, origin);
    RawLayout out;
    out.label_field = static_cast<std::size_t>(scan.label_idx);
    out.data_lines.reserve(scan.rows.size() - scan.first_data);
    for (std::size_t r = scan.first_data; r < scan.rows.size(); ++r)
        out.data_lines.push_back(scan.line_nos[r] - 1);
    return out;
}

Dataset synth_blobs(std::size_t n, std::size_t q, int n_classes, double spread,
                    std::uint64_t seed) {
    if (n_classes < 2) throw std::invalid_argument("synth_blobs: need at least 2 classes");
    if (n < static_cast<std::size_t>(n_classes))
        throw std::invalid_argument("synth_blobs: n must be >= n_classes");
    if (q < 1) throw std::invalid_argument("synth_blobs: q must be >= 1");
    if (spread <= 0.0) throw std::invalid_argument("synth_blobs: spread must be positive");

    Rng rng(seed);
    const double min_dist = 4.0 * spread;
    std::vector<std::vector<double>> centers;
    int retries = 0;
    const int max_retries = 100000;
    while (static_cast<int>(centers.size()) < n_classes) {
        std::vector<double> c(q);
        for (std::size_t j = 0; j < q; ++j) c[j] = 10.0 * rng.uniform01();
        bool ok = true;
        for (const auto& other : centers) {
            double s = 0.0;
            for (std::size_t j = 0; j < q; ++j) s += (c[j] - other[j]) * (c[j] - other[j]);
            if (std::sqrt(s) < min_dist) {
                ok = false;
                break;
            }
        }
        if (ok) {
            centers.push_back(std::move(c));
        } else if (++retries > max_retries) {
            throw std::runtime_error("synth_blobs: infeasible center placement");
        }
    }

    Dataset d;
    d.n = n;
    d.q = q;
    d.n_classes = n_classes;
    d.features.resize(n * q);
    d.labels.resize(n);
    std::size_t row = 0;
    for (int c = 0; c < n_classes; ++c) {
        std::size_t count = n / n_classes + (static_cast<std::size_t>(c) < n % n_classes ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i, ++row) {
            for (std::size_t j = 0; j < q; ++j)
                d.features[row * q + j] = centers[c][j] + spread * rng.normal();
            d.labels[row] = c;
        }
    }
    for (int c = 0; c < n_classes; ++c) d.class_names.push_back(std::to_string(c));
    return d;
}

namespace {

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.n = idx.size();
    out.q = d.q;
    out.n_classes = d.n_classes;
    out.feature_names = d.feature_names;
    out.class_names = d.class_names;
    out.features.resize(out.n * out.q);
    out.labels.resize(out.n);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(d.row(idx[r]), d.q, out.features.begin() + r * d.q);
        out.labels[r] = d.labels[idx[r]];
    }
    return out;
}

}  // namespace

SplitResult train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
    const std::size_t n_test =
        static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(d.n) + 1e-9));
    if (n_test == 0 || n_test >= d.n)
        throw std::invalid_argument("train_test_split: split leaves an empty side");

    std::vector<std::size_t> perm(d.n);
    for (std::size_t i = 0; i < d.n; ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = d.n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.below(i + 1)]);

    SplitResult s;
    s.test_index.assign(perm.begin(), perm.begin() + n_test);
    s.train_index.assign(perm.begin() + n_test, perm.end());
    std::sort(s.test_index.begin(), s.test_index.end());
    std::sort(s.train_index.begin(), s.train_index.end());
    s.train = take_rows(d, s.train_index);
    s.test = take_rows(d, s.test_index);

    std::set<int> train_classes(s.train.labels.begin(), s.train.labels.end());
    if (train_classes.size() < 2)
        throw std::runtime_error("train_test_split: train side is single-class");
    return s;
}

NoiseRecord inject_label_noise(Dataset& d, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0))
        throw std::invalid_argument("inject_label_noise: rate must be in [0,1]");
    NoiseRecord rec;
    rec.rate = rate;
    rec.seed = seed;
    const std::size_t m =
        static_cast<std::size_t>(std::floor(rate * static_cast<double>(d.n) + 1e-9));
    if (m == 0) return rec;

    Rng rng(seed);
    std::vector<std::size_t> perm(d.n);
    for (std::size_t i = 0; i < d.n; ++i) perm[i] = i;
    // Partial Fisher-Yates: first m entries are a uniform sample without
    // replacement.
    for (std::size_t i = 0; i < m; ++i)
        std::swap(perm[i], perm[i + rng.below(d.n - i)]);
    rec.flipped.assign(perm.begin(), perm.begin() + m);
    std::sort(rec.flipped.begin(), rec.flipped.end());

    rec.original_labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t idx = rec.flipped[i];
        const int old = d.labels[idx];
        rec.original_labels[i] = old;
        int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.n_classes - 1)));
        d.labels[idx] = r >= old ? r + 1 : r;
    }
    return rec;
}

NormParams fit_normalization(const Dataset& d) {
    NormParams p;
    p.mins.resize(d.q);
    p.scales.resize(d.q);
    for (std::size_t j = 0; j < d.q; ++j) {
        double lo = d.at(0, j), hi = d.at(0, j);
        for (std::size_t r = 1; r < d.n; ++r) {
            lo = std::min(lo, d.at(r, j));
            hi = std::max(hi, d.at(r, j));
        }
        p.mins[j] = lo;
        p.scales[j] = hi - lo;
    }
    return p;
}

void apply_normalization(Dataset& d, const NormParams& p) {
    if (p.mins.size() != d.q || p.scales.size() != d.q)
        throw std::invalid_argument("apply_normalization: parameter arity mismatch");
    for (std::size_t r = 0; r < d.n; ++r)
        for (std::size_t j = 0; j < d.q; ++j) {
            double& v = d.features[r * d.q + j];
            v = p.scales[j] == 0.0 ? 0.0 : (v - p.mins[j]) / p.scales[j];
        }
}

}  // namespace gbb
