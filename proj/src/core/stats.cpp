#include "lexiphylo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "lexiphylo/csv.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/rng.hpp"

namespace lexiphylo {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
// Permuted statistics within this of the observed one count as ties.
constexpr double kTieTolerance = 1.4901161193847656e-08;
}  // namespace

double great_circle(double lat1, double lon1, double lat2, double lon2) {
    for (double lat : {lat1, lat2})
        if (!(lat >= -90.0 && lat <= 90.0)) fail(ErrorCode::OutOfRange, "latitude out of range");
    for (double lon : {lon1, lon2})
        if (!(lon >= -180.0 && lon <= 180.0)) fail(ErrorCode::OutOfRange, "longitude out of range");
    const double p1 = lat1 * kDegToRad, p2 = lat2 * kDegToRad;
    const double dp = (lat2 - lat1) * kDegToRad, dl = (lon2 - lon1) * kDegToRad;
    const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceMatrix geo_matrix(const Corpus& corpus) {
    std::vector<std::string> ids;
    for (const auto& d : corpus.doculects) ids.push_back(d.id);
    DistanceMatrix m(ids);
    const auto& ds = corpus.doculects;
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            if (ds[i].latitude && ds[i].longitude && ds[j].latitude && ds[j].longitude)
                m.set(i, j, great_circle(*ds[i].latitude, *ds[i].longitude, *ds[j].latitude, *ds[j].longitude));
            else
                m.set_missing(i, j);
        }
    return m;
}

double cosine_character_distance(const CharacterMatrix& matrix, std::size_t t1, std::size_t t2) {
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t c = 0; c < matrix.char_count(); ++c) {
        const auto a = matrix.at(t1, c), b = matrix.at(t2, c);
        if (a == CharacterMatrix::kMissing || b == CharacterMatrix::kMissing) continue;
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    if (n1 == 0.0 || n2 == 0.0)
        fail(ErrorCode::ZeroVector, "no jointly defined non-zero characters for " + matrix.taxa()[t1] + " and " +
                                        matrix.taxa()[t2]);
    return std::clamp(1.0 - dot / (std::sqrt(n1) * std::sqrt(n2)), 0.0, 1.0);
}

DistanceMatrix cosine_distance_matrix(const CharacterMatrix& matrix) {
    DistanceMatrix m(matrix.taxa());
    const std::size_t n = matrix.taxa_count();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> v(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        try {
            v[k] = cosine_character_distance(matrix, pairs[k].first, pairs[k].second);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVector) throw;
            v[k] = std::nan("");
        }
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (std::isnan(v[k])) m.set_missing(pairs[k].first, pairs[k].second);
        else m.set(pairs[k].first, pairs[k].second, v[k]);
    }
    return m;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorCode::SizeMismatch, "correlation of vectors of different length");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

// Rows of b in a's taxon order.
std::vector<std::size_t> align_taxa(const DistanceMatrix& a, const DistanceMatrix& b) {
    if (a.size() != b.size()) fail(ErrorCode::SizeMismatch, "matrices cover different numbers of taxa");
    std::vector<std::size_t> map(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto k = b.index_of(a.ids()[i]);
        if (!k) fail(ErrorCode::SizeMismatch, "taxon " + a.ids()[i] + " missing from second matrix");
        map[i] = *k;
    }
    return map;
}

// Mantel core on dense matrices given as upper-triangle accessors.
MantelResult mantel_core(std::size_t n, const std::vector<double>& a, const std::vector<double>& b,
                         std::size_t permutations, std::uint64_t seed) {
    // a, b: n*n dense
    std::vector<double> xa, xb;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            xa.push_back(a[i * n + j]);
            xb.push_back(b[i * n + j]);
        }
    MantelResult res;
    res.pairs = xa.size();
    res.permutations = permutations;
    res.r = pearson_correlation(xa, xb);
    if (std::isnan(res.r)) {
        res.p = 1.0;
        return res;
    }
    std::vector<unsigned char> hit(permutations, 0);
    parallel_for(permutations, [&](std::size_t k) {
        Rng rng(derive_seed(seed, k));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        std::vector<double> pb;
        pb.reserve(xa.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pb.push_back(b[perm[i] * n + perm[j]]);
        const double r = pearson_correlation(xa, pb);
        hit[k] = r >= res.r - kTieTolerance;
    });
    const auto count = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    res.p = static_cast<double>(1 + count) / static_cast<double>(permutations + 1);
    return res;
}

std::vector<double> dense(const DistanceMatrix& m, const std::vector<std::size_t>& order) {
    const std::size_t n = order.size();
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (m.missing(order[i], order[j]))
                fail(ErrorCode::MissingEntries, "missing distance between " + m.ids()[order[i]] + " and " +
                                                    m.ids()[order[j]]);
            out[i * n + j] = m.at(order[i], order[j]);
        }
    return out;
}

}  // namespace

MantelResult mantel(const DistanceMatrix& a, const DistanceMatrix& b, std::size_t permutations,
                    std::uint64_t seed) {
    const auto map = align_taxa(a, b);
    if (a.size() < 3) fail(ErrorCode::SizeMismatch, "Mantel test needs at least 3 taxa");
    std::vector<std::size_t> ident(a.size());
    std::iota(ident.begin(), ident.end(), 0);
    return mantel_core(a.size(), dense(a, ident), dense(b, map), permutations, seed);
}

std::vector<double> default_correlogram_edges() {
    std::vector<double> e;
    for (int k = 0; k <= 10; ++k) e.push_back(1000.0 * k);
    return e;
}

std::vector<CorrelogramBin> mantel_correlogram(const DistanceMatrix& geo, const DistanceMatrix& ling,
                                               const std::vector<double>& edges, std::size_t permutations,
                                               std::uint64_t seed) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        fail(ErrorCode::InvalidArgument, "correlogram needs at least two increasing bin edges");
    const auto map = align_taxa(geo, ling);
    const std::size_t n = geo.size();
    std::vector<std::size_t> ident(n);
    std::iota(ident.begin(), ident.end(), 0);
    const auto g = dense(geo, ident);
    const auto l = dense(ling, map);
    std::vector<CorrelogramBin> out;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        CorrelogramBin bin;
        bin.lower = edges[k];
        bin.upper = edges[k + 1];
        const bool last = k + 2 == edges.size();
        std::vector<double> member(n * n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double v = g[i * n + j];
                if (i != j && v >= bin.lower && (v < bin.upper || (last && v == bin.upper))) {
                    member[i * n + j] = 0.0;
                    if (i < j) ++bin.pairs;
                }
            }
        const std::size_t total = n * (n - 1) / 2;
        if (bin.pairs == 0 || bin.pairs == total) {
            bin.empty = true;
            bin.r = std::nan("");
            bin.p = std::nan("");
        } else {
            const auto m = mantel_core(n, member, l, permutations, derive_seed(seed, k));
            bin.r = m.r;
            bin.p = m.p;
            bin.significant = m.p < 0.05;
        }
        out.push_back(bin);
    }
    return out;
}

std::vector<std::vector<double>> brownian_covariance(const Tree& tree, const std::vector<std::string>& leaves) {
    // root-to-node depth and ancestor chains
    const std::size_t nn = tree.nodes.size();
    std::vector<double> depth(nn, 0.0);
    std::vector<int> order{tree.root};
    for (std::size_t k = 0; k < order.size(); ++k)
        for (int c : tree.nodes[static_cast<std::size_t>(order[k])].children) {
            depth[static_cast<std::size_t>(c)] =
                depth[static_cast<std::size_t>(order[k])] + tree.nodes[static_cast<std::size_t>(c)].length;
            order.push_back(c);
        }
    std::vector<std::vector<int>> chain;
    for (const auto& l : leaves) {
        const auto v = tree.find_leaf(l);
        if (!v) fail(ErrorCode::LeafNotFound, l);
        std::vector<int> c;
        for (int x = *v; x >= 0; x = tree.nodes[static_cast<std::size_t>(x)].parent) c.push_back(x);
        std::reverse(c.begin(), c.end());
        chain.push_back(std::move(c));
    }
    std::vector<std::vector<double>> cov(leaves.size(), std::vector<double>(leaves.size(), 0.0));
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t j = i; j < leaves.size(); ++j) {
            std::size_t k = 0;
            while (k < chain[i].size() && k < chain[j].size() && chain[i][k] == chain[j][k]) ++k;
            cov[i][j] = cov[j][i] = depth[static_cast<std::size_t>(chain[i][k - 1])];
        }
    return cov;
}

RegressionResult gls(std::span<const double> x, std::span<const double> y,
                     const std::vector<std::vector<double>>& covariance) {
    const std::size_t n = x.size();
    if (y.size() != n || covariance.size() != n) fail(ErrorCode::SizeMismatch, "regression inputs differ in size");
    if (n < 3) fail(ErrorCode::InvalidArgument, "regression needs at least 3 observations");
    Eigen::MatrixXd v(n, n), xm(n, 2);
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = covariance[i][j];
        xm(static_cast<Eigen::Index>(i), 0) = 1.0;
        xm(static_cast<Eigen::Index>(i), 1) = x[i];
        yv(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(v);
    if (llt.info() != Eigen::Success) fail(ErrorCode::SingularCovariance, "covariance is not positive definite");
    const Eigen::MatrixXd vx = llt.solve(xm);
    const Eigen::VectorXd vy = llt.solve(yv);
    const Eigen::Matrix2d xtvx = xm.transpose() * vx;
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(xtvx);
    if (!lu.isInvertible()) fail(ErrorCode::SingularCovariance, "design is singular (constant x)");
    const Eigen::Matrix2d inv = lu.inverse();
    const Eigen::Vector2d beta = inv * (xm.transpose() * vy);
    const Eigen::VectorXd e = yv - xm * beta;
    const double sigma2 = e.dot(llt.solve(e)) / static_cast<double>(n - 2);

    RegressionResult r;
    r.n_taxa = n;
    r.intercept = beta(0);
    r.slope = beta(1);
    r.standard_error = std::sqrt(std::max(0.0, sigma2 * inv(1, 1)));
    const double scale = std::max(1.0, std::abs(r.slope));
    if (r.standard_error <= 1e-15 * scale) {
        r.t = r.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.slope);
        r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
    } else {
        r.t = r.slope / r.standard_error;
        const boost::math::students_t dist(static_cast<double>(n - 2));
        r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
    }
    return r;
}

RegressionResult pgls(const Tree& tree, const std::map<std::string, double>& x,
                      const std::map<std::string, double>& y) {
    if (!tree.rooted) fail(ErrorCode::UnrootedTree, "PGLS needs a rooted tree");
    const auto leaves = tree.leaf_labels();
    std::vector<double> xv, yv;
    for (const auto& l : leaves) {
        const auto ix = x.find(l), iy = y.find(l);
        if (ix == x.end() || iy == y.end()) fail(ErrorCode::SizeMismatch, "no observation for leaf " + l);
        xv.push_back(ix->second);
        yv.push_back(iy->second);
    }
    if (x.size() != leaves.size() || y.size() != leaves.size())
        fail(ErrorCode::SizeMismatch, "observations do not match the tree's leaves");
    const auto cov = brownian_covariance(tree, leaves);
    for (std::size_t i = 0; i < leaves.size(); ++i)
        if (!(cov[i][i] > 0.0)) fail(ErrorCode::SingularCovariance, "leaf " + leaves[i] + " sits at the root");
    return gls(xv, yv, cov);
}

RegressionResult pgls_path_stats(const Tree& tree) {
    std::map<std::string, double> x, y;
    for (const auto& s : path_stats(tree)) {
        x[s.label] = s.path_length;
        y[s.label] = static_cast<double>(s.nodes);
    }
    return pgls(tree, x, y);
}

std::vector<bool> holm_bonferroni(std::span<const double> p, double alpha) {
    const std::size_t m = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfRange, "p-value outside [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<bool> out(m, false);
    for (std::size_t k = 0; k < m; ++k) {
        if (p[order[k]] > alpha / static_cast<double>(m - k)) break;
        out[order[k]] = true;
    }
    return out;
}

std::vector<PunctuationRow> punctuation_analysis(const Corpus& corpus, const DistanceMatrix& dmatrix,
                                                 const std::map<std::string, Tree>& trees,
                                                 const std::map<std::string, bool>& delta_flags,
                                                 const PunctuationOptions& options) {
    std::map<std::string, std::vector<std::string>> families;
    for (const auto& d : corpus.doculects) families[d.family].push_back(d.id);

    std::vector<PunctuationRow> rows;
    for (const auto& [family, members] : families) {
        PunctuationRow row;
        row.family = family;
        row.regression.n_taxa = members.size();
        const auto flag = delta_flags.find(family);
        if (members.size() < options.min_taxa) {
            row.status = "too_few_taxa";
        } else if (flag == delta_flags.end()) {
            row.status = "no_delta_flag";
        } else if (flag->second) {
            row.status = "delta_positive";
        } else {
            Tree tree;
            if (const auto t = trees.find(family); t != trees.end()) {
                tree = t->second;
                if (!tree.rooted) fail(ErrorCode::UnrootedTree, "tree for " + family + " is not rooted");
            } else {
                row.outgroup = select_outgroup(members, dmatrix);
                auto taxa = members;
                taxa.push_back(row.outgroup);
                tree = root_with_outgroup(bionj(dmatrix.subset(taxa)), row.outgroup);
            }
            row.regression = pgls_path_stats(tree);
            row.status = "tested";
        }
        rows.push_back(std::move(row));
    }

    std::vector<double> p;
    std::vector<std::size_t> tested;
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (rows[k].status == "tested") {
            p.push_back(rows[k].regression.p_value);
            tested.push_back(k);
        }
    const auto sig = holm_bonferroni(p, options.alpha);
    for (std::size_t k = 0; k < tested.size(); ++k)
        rows[tested[k]].significant = sig[k] && rows[tested[k]].regression.slope > 0.0;
    return rows;
}

void write_punctuation_table(const std::vector<PunctuationRow>& rows, std::ostream& out) {
    csv::write_row(out, {"family", "status", "slope", "p_value", "n_taxa", "significant", "outgroup"});
    for (const auto& r : rows) {
        const bool tested = r.status == "tested";
        csv::write_row(out, {r.family, r.status, tested ? format_double(r.regression.slope) : "",
                             tested ? format_double(r.regression.p_value) : "", std::to_string(r.regression.n_taxa),
                             tested ? (r.significant ? "yes" : "no") : "", r.outgroup});
    }
}

std::map<std::string, bool> read_delta_flags(std::istream& in) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row) || row.size() != 2 || row[0] != "family" || row[1] != "delta_positive")
        fail(ErrorCode::ParseError, "delta flags: expected header 'family,delta_positive'");
    std::map<std::string, bool> flags;
    while (reader.next(row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 2) fail(ErrorCode::ParseError, "delta flags line " + std::to_string(reader.line()));
        std::string v = row[1];
        for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (v == "1" || v == "true" || v == "yes") flags[row[0]] = true;
        else if (v == "0" || v == "false" || v == "no") flags[row[0]] = false;
        else fail(ErrorCode::ParseError, "delta flags line " + std::to_string(reader.line()) + ": bad value " + row[1]);
    }
    return flags;
}

}  // namespace lexiphylo
