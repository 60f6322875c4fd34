#include "gbboost/ensemble_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gbb {

namespace {

constexpr const char* kMagic = "gbboost-ensemble v1";

std::string hex(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex(const std::string& tok) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end != s + tok.size())
        throw std::runtime_error("ensemble: bad numeric field '" + tok + "'");
    return v;
}

// Pulls one line and wraps it in a stream; throws on premature EOF.
std::istringstream next_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(std::string("ensemble: truncated before ") + what);
    return std::istringstream(line);
}

void expect(std::istringstream& ls, const std::string& want) {
    std::string got;
    ls >> got;
    if (got != want)
        throw std::runtime_error("ensemble: expected '" + want + "', got '" + got + "'");
}

}  // namespace

std::string serialize_ensemble(const TrainedEnsemble& ens) {
    std::ostringstream os;
    os << kMagic << "\n";
    os << "algorithm " << algo_name(ens.algorithm) << "\n";
    os << "classes " << ens.n_classes << "\n";
    os << "features " << ens.n_features << "\n";
    os << "kind " << (ens.spec.kind == LearnerKind::stump ? "stump" : "tree") << "\n";
    os << "max_depth " << ens.spec.max_depth << "\n";
    os << "min_leaf " << ens.spec.min_leaf << "\n";
    os << "stop_reason " << ens.stop_reason << "\n";
    os << "final_subset " << ens.final_subset_size << "\n";

    os << "norm " << (ens.norm.mins.empty() ? 0 : 1) << "\n";
    if (!ens.norm.mins.empty()) {
        os << "mins";
        for (double v : ens.norm.mins) os << ' ' << hex(v);
        os << "\nscales";
        for (double v : ens.norm.scales) os << ' ' << hex(v);
        os << "\n";
    }

    os << "members " << ens.members.size() << "\n";
    for (std::size_t t = 0; t < ens.members.size(); ++t) {
        const Tree& tree = ens.members[t];
        os << "member " << t << " beta " << hex(ens.betas[t]) << " nodes "
           << tree.nodes.size() << "\n";
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const TreeNode& n = tree.nodes[i];
            if (n.is_leaf())
                os << "node " << i << " leaf " << n.label;
            else
                os << "node " << i << " split " << n.feature << ' ' << hex(n.threshold)
                   << ' ' << n.left << ' ' << n.right;
            os << " hist";
            for (double h : n.hist) os << ' ' << hex(h);
            os << "\n";
        }
    }

    os << "history " << ens.history.size() << "\n";
    for (const IterationRecord& r : ens.history) {
        os << "iter " << r.iteration << " eps " << hex(r.epsilon) << " beta "
           << hex(r.beta) << " subset " << r.subset_size << " rfactor "
           << hex(r.loss_factor) << " admitted " << (r.admitted ? 1 : 0) << " note "
           << r.note << "\n";
    }
    os << "end\n";
    return os.str();
}

TrainedEnsemble parse_ensemble(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("ensemble: bad or missing header");

    TrainedEnsemble ens;
    std::string tok;

    {
        auto ls = next_line(in, "algorithm");
        expect(ls, "algorithm");
        ls >> tok;
        ens.algorithm = algo_from_name(tok);
    }
    {
        auto ls = next_line(in, "classes");
        expect(ls, "classes");
        ls >> ens.n_classes;
    }
    {
        auto ls = next_line(in, "features");
        expect(ls, "features");
        ls >> ens.n_features;
    }
    {
        auto ls = next_line(in, "kind");
        expect(ls, "kind");
        ls >> tok;
        ens.spec.kind = tok == "stump" ? LearnerKind::stump : LearnerKind::tree;
    }
    {
        auto ls = next_line(in, "max_depth");
        expect(ls, "max_depth");
        ls >> ens.spec.max_depth;
    }
    {
        auto ls = next_line(in, "min_leaf");
        expect(ls, "min_leaf");
        ls >> ens.spec.min_leaf;
    }
    {
        auto ls = next_line(in, "stop_reason");
        expect(ls, "stop_reason");
        std::getline(ls >> std::ws, ens.stop_reason);
    }
    {
        auto ls = next_line(in, "final_subset");
        expect(ls, "final_subset");
        ls >> ens.final_subset_size;
    }
    {
        auto ls = next_line(in, "norm");
        expect(ls, "norm");
        int have = 0;
        ls >> have;
        if (have) {
            auto ms = next_line(in, "mins");
            expect(ms, "mins");
            while (ms >> tok) ens.norm.mins.push_back(parse_hex(tok));
            auto ss = next_line(in, "scales");
            expect(ss, "scales");
            while (ss >> tok) ens.norm.scales.push_back(parse_hex(tok));
            if (ens.norm.mins.size() != ens.n_features ||
                ens.norm.scales.size() != ens.n_features)
                throw std::runtime_error("ensemble: normalization arity mismatch");
        }
    }

    std::size_t n_members = 0;
    {
        auto ls = next_line(in, "members");
        expect(ls, "members");
        ls >> n_members;
    }
    for (std::size_t t = 0; t < n_members; ++t) {
        auto ls = next_line(in, "member");
        expect(ls, "member");
        std::size_t id = 0, n_nodes = 0;
        ls >> id;
        expect(ls, "beta");
        ls >> tok;
        ens.betas.push_back(parse_hex(tok));
        expect(ls, "nodes");
        ls >> n_nodes;

        Tree tree;
        tree.n_features = ens.n_features;
        tree.n_classes = ens.n_classes;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            auto ns = next_line(in, "node");
            expect(ns, "node");
            std::size_t nid = 0;
            ns >> nid >> tok;
            TreeNode node;
            if (tok == "leaf") {
                ns >> node.label;
            } else if (tok == "split") {
                ns >> node.feature;
                ns >> tok;
                node.threshold = parse_hex(tok);
                ns >> node.left >> node.right;
            } else {
                throw std::runtime_error("ensemble: bad node kind '" + tok + "'");
            }
            expect(ns, "hist");
            while (ns >> tok) node.hist.push_back(parse_hex(tok));
            if (node.hist.size() != static_cast<std::size_t>(ens.n_classes))
                throw std::runtime_error("ensemble: node histogram arity mismatch");
            tree.nodes.push_back(std::move(node));
        }
        if (tree.nodes.empty()) throw std::runtime_error("ensemble: member with no nodes");
        ens.members.push_back(std::move(tree));
    }

    std::size_t n_hist = 0;
    {
        auto ls = next_line(in, "history");
        expect(ls, "history");
        ls >> n_hist;
    }
    for (std::size_t i = 0; i < n_hist; ++i) {
        auto ls = next_line(in, "iter");
        IterationRecord r;
        expect(ls, "iter");
        ls >> r.iteration;
        expect(ls, "eps");
        ls >> tok;
        r.epsilon = parse_hex(tok);
        expect(ls, "beta");
        ls >> tok;
        r.beta = parse_hex(tok);
        expect(ls, "subset");
        ls >> r.subset_size;
        expect(ls, "rfactor");
        ls >> tok;
        r.loss_factor = parse_hex(tok);
        expect(ls, "admitted");
        int adm = 0;
        ls >> adm;
        r.admitted = adm != 0;
        expect(ls, "note");
        std::getline(ls >> std::ws, r.note);
        ens.history.push_back(std::move(r));
    }
    {
        auto ls = next_line(in, "end");
        expect(ls, "end");
    }
    return ens;
}

void save_ensemble(const std::string& path, const TrainedEnsemble& ens) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << serialize_ensemble(ens);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " to " + path);
}

TrainedEnsemble load_ensemble(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_ensemble(buf.str());
}

}  // namespace gbb
