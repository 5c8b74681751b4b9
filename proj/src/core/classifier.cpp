#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <list>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "lexiphylo/cogclust.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"

namespace lexiphylo {

namespace {

std::vector<std::size_t> mask_indices(FeatureMask mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (mask & (1u << i)) idx.push_back(i);
    return idx;
}

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::exp(-gamma * s);
}

// Kernel rows Q_i(t) = y_i y_t K(x_i, x_t), with a bounded LRU cache.
class KernelRows {
public:
    KernelRows(const std::vector<std::vector<double>>& x, const std::vector<double>& y, double gamma)
        : x_(x), y_(y), gamma_(gamma) {
        const std::size_t budget = std::size_t{200} << 20;  // bytes
        capacity_ = std::max<std::size_t>(2, budget / (sizeof(double) * std::max<std::size_t>(1, x.size())));
    }

    const std::vector<double>& row(std::size_t i) {
        auto it = cache_.find(i);
        if (it != cache_.end()) {
            order_.splice(order_.begin(), order_, it->second.second);
            return it->second.first;
        }
        if (cache_.size() >= capacity_) {
            cache_.erase(order_.back());
            order_.pop_back();
        }
        std::vector<double> r(x_.size());
        for (std::size_t t = 0; t < x_.size(); ++t) r[t] = y_[i] * y_[t] * rbf(x_[i], x_[t], gamma_);
        order_.push_front(i);
        auto& slot = cache_[i];
        slot.first = std::move(r);
        slot.second = order_.begin();
        return slot.first;
    }

private:
    const std::vector<std::vector<double>>& x_;
    const std::vector<double>& y_;
    double gamma_;
    std::size_t capacity_;
    std::list<std::size_t> order_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> cache_;
};

struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    double gap = 0.0;
};

// Dual C-SVC by SMO with second-order working set selection.
SmoResult smo(const std::vector<std::vector<double>>& x, const std::vector<double>& y, double gamma,
              const SvmOptions& opt) {
    const std::size_t n = x.size();
    const double c = opt.c;
    constexpr double kTau = 1e-12;
    std::vector<double> alpha(n, 0.0), g(n, -1.0);
    KernelRows rows(x, y, gamma);
    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    SmoResult res;
    std::size_t iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -g[t] >= gmax) { gmax = -g[t]; i = static_cast<std::ptrdiff_t>(t); }
            } else {
                if (!lower(t) && g[t] >= gmax) { gmax = g[t]; i = static_cast<std::ptrdiff_t>(t); }
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j = -1;
        if (i >= 0) {
            const auto& qi = rows.row(static_cast<std::size_t>(i));
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n; ++t) {
                double grad_diff, quad;
                if (y[t] > 0) {
                    if (lower(t)) continue;
                    gmax2 = std::max(gmax2, g[t]);
                    grad_diff = gmax + g[t];
                    quad = 2.0 - 2.0 * y[i] * qi[t];
                } else {
                    if (upper(t)) continue;
                    gmax2 = std::max(gmax2, -g[t]);
                    grad_diff = gmax - g[t];
                    quad = 2.0 + 2.0 * y[i] * qi[t];
                }
                if (grad_diff > 0) {
                    const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
                    if (obj <= best) { best = obj; j = static_cast<std::ptrdiff_t>(t); }
                }
            }
        }
        res.gap = gmax + gmax2;
        if (i < 0 || j < 0 || gmax + gmax2 < opt.tolerance) break;

        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        const std::vector<double> qi = rows.row(ui);
        const std::vector<double>& qj = rows.row(uj);
        const double old_i = alpha[ui], old_j = alpha[uj];
        double ai = old_i, aj = old_j;
        if (y[ui] != y[uj]) {
            double quad = 2.0 + 2.0 * qi[uj];
            if (quad <= 0) quad = kTau;
            const double delta = (-g[ui] - g[uj]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) { aj = 0; ai = diff; }
            } else {
                if (ai < 0) { ai = 0; aj = -diff; }
            }
            if (diff > 0) {
                if (ai > c) { ai = c; aj = c - diff; }
            } else {
                if (aj > c) { aj = c; ai = c + diff; }
            }
        } else {
            double quad = 2.0 - 2.0 * qi[uj];
            if (quad <= 0) quad = kTau;
            const double delta = (g[ui] - g[uj]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) { ai = c; aj = sum - c; }
            } else {
                if (aj < 0) { aj = 0; ai = sum; }
            }
            if (sum > c) {
                if (aj > c) { aj = c; ai = sum - c; }
            } else {
                if (ai < 0) { ai = 0; aj = sum; }
            }
        }
        alpha[ui] = ai;
        alpha[uj] = aj;
        const double di = ai - old_i, dj = aj - old_j;
        for (std::size_t t = 0; t < n; ++t) g[t] += qi[t] * di + qj[t] * dj;
    }
    res.iterations = iter;

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * g[t];
        if (upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    res.rho = free > 0 ? sum_free / static_cast<double>(free) : (ub + lb) / 2.0;
    res.alpha = std::move(alpha);
    return res;
}

std::vector<double> quadratic_terms(const std::vector<double>& z) {
    std::vector<double> phi{1.0};
    phi.insert(phi.end(), z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i; j < z.size(); ++j) phi.push_back(z[i] * z[j]);
    return phi;
}

double sigmoid(double t) {
    return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

void fit_logistic(ClassifierModel& m, const std::vector<std::vector<double>>& z, std::span<const int> labels) {
    constexpr double kLambda = 1e-3;
    std::vector<std::vector<double>> phi;
    phi.reserve(z.size());
    for (const auto& v : z) phi.push_back(quadratic_terms(v));
    const auto k = static_cast<Eigen::Index>(phi.front().size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const Eigen::Map<const Eigen::VectorXd> x(phi[i].data(), k);
            const double p = sigmoid(w.dot(x));
            grad += (p - labels[i]) * x;
            h += std::max(p * (1 - p), 1e-12) * x * x.transpose();
        }
        for (Eigen::Index r = 1; r < k; ++r) {
            grad(r) += kLambda * w(r);
            h(r, r) += kLambda;
        }
        h(0, 0) += 1e-9;
        const Eigen::VectorXd step = h.ldlt().solve(grad);
        w -= step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
    }
    m.weights.assign(w.data(), w.data() + k);
}

}  // namespace

double platt_probability(double decision, double a, double b) { return sigmoid(-(decision * a + b)); }

std::pair<double, double> fit_platt(std::span<const double> dec, std::span<const int> labels) {
    if (dec.size() != labels.size()) fail(ErrorCode::SizeMismatch, "platt: size mismatch");
    double prior1 = 0, prior0 = 0;
    for (int l : labels) (l > 0 ? prior1 : prior0) += 1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(dec.size());
    for (std::size_t i = 0; i < dec.size(); ++i) t[i] = labels[i] > 0 ? hi : lo;

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < dec.size(); ++i) {
            const double z = dec[i] * a + b;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1) * z + std::log1p(std::exp(z));
        }
        return f;
    };
    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < dec.size(); ++i) {
            const double z = dec[i] * a + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= 1e-10) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break;
    }
    return {a, b};
}

std::vector<double> ClassifierModel::select(const FeatureVector& f) const {
    std::vector<double> z;
    std::size_t k = 0;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (mask & (1u << i)) {
            z.push_back((f[i] - mean[k]) / scale[k]);
            ++k;
        }
    return z;
}

double ClassifierModel::decision(const FeatureVector& f) const {
    const auto z = select(f);
    if (kind == ClassifierKind::Logistic) {
        const auto phi = quadratic_terms(z);
        double s = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) s += weights[i] * phi[i];
        return s;
    }
    double s = bias;
    for (std::size_t i = 0; i < support.size(); ++i) s += coef[i] * rbf(support[i], z, gamma);
    return s;
}

ClassifierModel train_classifier(std::span<const LabeledPair> data, FeatureMask mask,
                                 std::uint64_t /*seed*/, ClassifierKind kind, const SvmOptions& options) {
    if (mask == 0 || mask > kAllFeatures) fail(ErrorCode::InvalidArgument, "feature mask out of range");
    if (data.size() < 10) fail(ErrorCode::DegenerateLabels, "need at least 10 training pairs");
    std::size_t positives = 0;
    for (const auto& d : data) positives += d.label == 1;
    if (positives == 0 || positives == data.size())
        fail(ErrorCode::DegenerateLabels, "training labels are all " + std::to_string(data.front().label));

    ClassifierModel m;
    m.kind = kind;
    m.mask = mask;
    const auto idx = mask_indices(mask);
    const double n = static_cast<double>(data.size());
    for (std::size_t f : idx) {
        double mu = 0.0;
        for (const auto& d : data) mu += d.features[f];
        mu /= n;
        double var = 0.0;
        for (const auto& d : data) var += (d.features[f] - mu) * (d.features[f] - mu);
        var /= n;
        m.mean.push_back(mu);
        m.scale.push_back(var > 1e-24 ? std::sqrt(var) : 1.0);
    }
    std::vector<std::vector<double>> z;
    std::vector<int> labels;
    z.reserve(data.size());
    for (const auto& d : data) {
        z.push_back(m.select(d.features));
        labels.push_back(d.label);
    }

    if (kind == ClassifierKind::Logistic) {
        fit_logistic(m, z, labels);
        return m;
    }

    m.gamma = 1.0 / static_cast<double>(idx.size());
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
    const auto r = smo(z, y, m.gamma, options);
    m.iterations = r.iterations;
    m.kkt_gap = r.gap;
    m.bias = -r.rho;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (r.alpha[i] > 0.0) {
            m.support.push_back(z[i]);
            m.coef.push_back(r.alpha[i] * y[i]);
        }
    std::vector<double> dec(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) dec[i] = m.decision(data[i].features);
    std::tie(m.platt_a, m.platt_b) = fit_platt(dec, labels);
    return m;
}

double predict_proba(const ClassifierModel& model, const FeatureVector& features) {
    const double dv = model.decision(features);
    double p = model.kind == ClassifierKind::Logistic ? sigmoid(dv)
                                                       : platt_probability(dv, model.platt_a, model.platt_b);
    return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

namespace {

void write_values(std::ostream& out, const char* key, const std::vector<double>& v) {
    out << key << ' ' << v.size();
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
}

std::vector<double> read_values(std::istream& in, const std::string& key) {
    std::string k;
    std::size_t n = 0;
    if (!(in >> k >> n) || k != key) fail(ErrorCode::ParseError, "classifier: expected " + key);
    std::vector<double> v(n);
    for (auto& x : v) {
        std::string t;
        if (!(in >> t)) fail(ErrorCode::ParseError, "classifier: truncated " + key);
        x = parse_double(t, "classifier " + key);
    }
    return v;
}

double read_scalar(std::istream& in, const std::string& key) {
    std::string k, t;
    if (!(in >> k >> t) || k != key) fail(ErrorCode::ParseError, "classifier: expected " + key);
    return parse_double(t, "classifier " + key);
}

}  // namespace

void write_classifier(const ClassifierModel& m, std::ostream& out) {
    out << "lexiphylo-classifier 1\n";
    out << "kind " << (m.kind == ClassifierKind::Svm ? "svm" : "logistic") << '\n';
    out << "mask " << m.mask << '\n';
    write_values(out, "mean", m.mean);
    write_values(out, "scale", m.scale);
    if (m.kind == ClassifierKind::Logistic) {
        write_values(out, "weights", m.weights);
        return;
    }
    out << "gamma " << format_double(m.gamma) << '\n';
    out << "bias " << format_double(m.bias) << '\n';
    out << "platt_a " << format_double(m.platt_a) << '\n';
    out << "platt_b " << format_double(m.platt_b) << '\n';
    out << "support " << m.support.size() << '\n';
    for (std::size_t i = 0; i < m.support.size(); ++i) {
        out << format_double(m.coef[i]);
        for (double x : m.support[i]) out << ' ' << format_double(x);
        out << '\n';
    }
}

ClassifierModel read_classifier(std::istream& in) {
    std::string magic, version, key, kind;
    if (!(in >> magic >> version) || magic != "lexiphylo-classifier" || version != "1")
        fail(ErrorCode::ParseError, "not a classifier file");
    ClassifierModel m;
    if (!(in >> key >> kind) || key != "kind" || (kind != "svm" && kind != "logistic"))
        fail(ErrorCode::ParseError, "classifier: bad kind");
    m.kind = kind == "svm" ? ClassifierKind::Svm : ClassifierKind::Logistic;
    if (!(in >> key >> m.mask) || key != "mask" || m.mask == 0 || m.mask > kAllFeatures)
        fail(ErrorCode::ParseError, "classifier: bad mask");
    m.mean = read_values(in, "mean");
    m.scale = read_values(in, "scale");
    const std::size_t d = mask_indices(m.mask).size();
    if (m.mean.size() != d || m.scale.size() != d) fail(ErrorCode::ParseError, "classifier: dimension mismatch");
    if (m.kind == ClassifierKind::Logistic) {
        m.weights = read_values(in, "weights");
        if (m.weights.size() != 1 + d + d * (d + 1) / 2) fail(ErrorCode::ParseError, "classifier: bad weights");
        return m;
    }
    m.gamma = read_scalar(in, "gamma");
    m.bias = read_scalar(in, "bias");
    m.platt_a = read_scalar(in, "platt_a");
    m.platt_b = read_scalar(in, "platt_b");
    std::size_t k = 0;
    if (!(in >> key >> k) || key != "support") fail(ErrorCode::ParseError, "classifier: expected support");
    m.support.assign(k, std::vector<double>(d));
    m.coef.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::string t;
        if (!(in >> t)) fail(ErrorCode::ParseError, "classifier: truncated support");
        m.coef[i] = parse_double(t, "classifier coef");
        for (auto& x : m.support[i]) {
            if (!(in >> t)) fail(ErrorCode::ParseError, "classifier: truncated support");
            x = parse_double(t, "classifier support");
        }
    }
    return m;
}

}  // namespace lexiphylo
