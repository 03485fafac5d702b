#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace oracle {

Mat to_mat(const Eigen::MatrixXd& m) {
    Mat out(static_cast<size_t>(m.rows()), std::vector<double>(static_cast<size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

Eigen::MatrixXd from_mat(const Mat& m) {
    Eigen::MatrixXd out(m.size(), m.empty() ? 0 : m[0].size());
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j];
    return out;
}

Mat inverse(Mat a) {
    const size_t n = a.size();
    Mat inv(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) throw std::runtime_error("singular");
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const double d = a[c][c];
        for (size_t j = 0; j < n; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

double determinant(Mat a) {
    const size_t n = a.size();
    double det = 1.0;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(a[c], a[piv]);
            det = -det;
        }
        det *= a[c][c];
        for (size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return det;
}

double mean(Fam f, double eta) {
    if (f == Fam::Poisson) return std::exp(eta);
    return 1.0 / (1.0 + std::exp(-eta));
}

double weight(Fam f, double eta) {
    const double m = mean(f, eta);
    return f == Fam::Poisson ? m : m * (1.0 - m);
}

namespace {

double dot_row(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) s += x(i, j) * b[j];
    return s;
}

Mat information(Fam f, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x) {
    const size_t d = static_cast<size_t>(x.cols());
    Mat j(d, std::vector<double>(d, 0.0));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double w = weight(f, dot_row(x, i, theta));
        for (size_t a = 0; a < d; ++a)
            for (size_t b = 0; b < d; ++b) j[a][b] += w * x(i, a) * x(i, b);
    }
    for (auto& row : j)
        for (double& v : row) v /= static_cast<double>(x.rows());
    return j;
}

}  // namespace

Eigen::VectorXd irls(Fam f, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const size_t d = static_cast<size_t>(x.cols());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    for (int it = 0; it < 200; ++it) {
        Mat xtwx(d, std::vector<double>(d, 0.0));
        std::vector<double> xtwz(d, 0.0);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double eta = dot_row(x, i, beta);
            const double w = weight(f, eta);
            const double z = eta + (y[i] - mean(f, eta)) / w;
            for (size_t a = 0; a < d; ++a) {
                xtwz[a] += w * x(i, a) * z;
                for (size_t b = 0; b < d; ++b) xtwx[a][b] += w * x(i, a) * x(i, b);
            }
        }
        const Mat inv = inverse(xtwx);
        Eigen::VectorXd next(x.cols());
        for (size_t a = 0; a < d; ++a) {
            double s = 0.0;
            for (size_t b = 0; b < d; ++b) s += inv[a][b] * xtwz[b];
            next[a] = s;
        }
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (change < 1e-13) return beta;
    }
    return beta;
}

Eigen::VectorXd phi(bool mmse, Fam f, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                    const Eigen::VectorXd& y, double eps) {
    const size_t d = static_cast<size_t>(x.cols());
    Mat jinv;
    if (mmse) jinv = inverse(information(f, theta, x));
    Eigen::VectorXd p(x.rows());
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double res = std::max(std::abs(y[i] - mean(f, dot_row(x, i, theta))), eps);
        double sq = 0.0;
        for (size_t a = 0; a < d; ++a) {
            double v = x(i, a);
            if (mmse) {
                v = 0.0;
                for (size_t b = 0; b < d; ++b) v += jinv[a][b] * x(i, b);
            }
            sq += v * v;
        }
        p[i] = res * std::sqrt(sq);
        total += p[i];
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] /= total;
    return p;
}

double trace_criterion(bool mmse, Fam f, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& phi) {
    const size_t d = static_cast<size_t>(x.cols());
    const double n = static_cast<double>(x.rows());
    Mat vc(d, std::vector<double>(d, 0.0));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double res = y[i] - mean(f, dot_row(x, i, theta));
        for (size_t a = 0; a < d; ++a)
            for (size_t b = 0; b < d; ++b)
                vc[a][b] += res * res * x(i, a) * x(i, b) / phi[i] / (n * n);
    }
    if (!mmse) {
        double t = 0.0;
        for (size_t a = 0; a < d; ++a) t += vc[a][a];
        return t;
    }
    const Mat jinv = inverse(information(f, theta, x));
    // tr(J^{-1} Vc J^{-1})
    double t = 0.0;
    for (size_t a = 0; a < d; ++a)
        for (size_t b = 0; b < d; ++b)
            for (size_t c = 0; c < d; ++c) t += jinv[a][b] * vc[b][c] * jinv[c][a];
    return t;
}

double loglik(Fam f, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
              const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double eta = dot_row(x, i, theta);
        if (f == Fam::Poisson) {
            s += y[i] * eta - std::exp(eta) - std::lgamma(y[i] + 1.0);
        } else {
            s += y[i] * eta - std::log1p(std::exp(eta));
        }
    }
    return s;
}

}  // namespace oracle
