#include "levikal/expm.hpp"

#include <cmath>

#include "levikal/error.hpp"

namespace levikal {

namespace {

constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norm for which the degree-13 approximant is accurate to unit roundoff.
constexpr double kTheta13 = 5.371920351148152;

void check_finite(const Eigen::MatrixXd& a) {
    if (!a.allFinite()) throw NumericError("expm: non-finite matrix entries");
}

}  // namespace

Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& a_in) {
    check_finite(a_in);
    if (a_in.rows() != a_in.cols()) throw ContractError("expm: matrix must be square");
    const Eigen::Index n = a_in.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const double norm1 = a_in.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    }
    const Eigen::MatrixXd a = a_in / std::ldexp(1.0, squarings);

    const Eigen::MatrixXd a2 = a * a;
    const Eigen::MatrixXd a4 = a2 * a2;
    const Eigen::MatrixXd a6 = a4 * a2;
    const double* b = kPade13;
    const Eigen::MatrixXd u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
    const Eigen::MatrixXd u =
        a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Eigen::MatrixXd v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
    const Eigen::MatrixXd v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    check_finite(r);
    return r;
}

Eigen::Matrix2d expm_2x2(const Eigen::Matrix2d& a) {
    if (!a.allFinite()) throw NumericError("expm: non-finite matrix entries");
    const double s = 0.5 * a.trace();
    const Eigen::Matrix2d b = a - s * Eigen::Matrix2d::Identity();
    // b^2 = -det(b) I, so q^2 = -det(b).
    const double q2 = -b.determinant();
    double ch, sh_over_q;
    if (std::abs(q2) < 1e-8) {
        // Series in q2 to avoid 0/0; truncation error O(q2^3) relative.
        ch = 1.0 + q2 / 2.0 + q2 * q2 / 24.0;
        sh_over_q = 1.0 + q2 / 6.0 + q2 * q2 / 120.0;
    } else if (q2 > 0.0) {
        const double q = std::sqrt(q2);
        ch = std::cosh(q);
        sh_over_q = std::sinh(q) / q;
    } else {
        const double q = std::sqrt(-q2);
        ch = std::cos(q);
        sh_over_q = std::sin(q) / q;
    }
    return std::exp(s) * (ch * Eigen::Matrix2d::Identity() + sh_over_q * b);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    if (a.rows() == 2 && a.cols() == 2) {
        return expm_2x2(a);
    }
    return expm_pade13(a);
}

}  // namespace levikal
