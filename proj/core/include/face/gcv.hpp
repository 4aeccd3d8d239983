#pragma once

#include <vector>

#include "face/linalg.hpp"
#include "face/smoother.hpp"

namespace face {

// Row-wise Khatri-Rao product: row r of the result is A.row(r) (x) B.row(r).
Matrix row_khatri_rao(const Matrix& A, const Matrix& B);

// Lambda-independent pieces of the fast leave-one-subject-out GCV.
// With F_i = X_i A, f_i = F_i^T y_i, J_i = F_i^T W_i y_i, L_i = F_i^T W_i F_i:
//   f = sum f_i, f_tilde = sum J_i, FtF = sum F_i^T F_i,
//   g = sum J_i o f_i,
//   G1 = sum (J_i f_tilde^T) o (F_i^T F_i),
//   G1_cross = sum (f_i f_tilde^T) o L_i,
//   G2 = sum L_i (.) (F_i^T F_i)        (row-wise Khatri-Rao, p x p^2).
// G1_cross equals G1 when every W_i = I.
struct GcvPrecomp {
    double norm_C2 = 0.0;
    Vector f;
    Vector f_tilde;
    Matrix FtF;
    Vector g;
    Matrix G1;
    Matrix G1_cross;
    Matrix G2;
};

GcvPrecomp precompute(const GroupedProblem& problem, const Diagonalization& diag);

// iGCV(lambda) from the precomputed pieces; O(p^3) per call.
double igcv_value(const GcvPrecomp& pre, const Vector& s, double lambda);

// Leave-one-subject-out CV error evaluated block by block:
//   sum_i || (I - S_ii)^{-1} (S_i y - y_i) ||^2
// with S = X (X^T W X + ridge I + lambda Q)^{-1} X^T W.
double exact_icv(const GroupedProblem& problem, double lambda, double ridge = 0.0);

struct LambdaSelection {
    double lambda = 0.0;
    std::size_t index = 0;
    std::vector<double> grid;
    std::vector<double> scores;
    bool on_boundary = false;
};

// Exhaustive scan; ties go to the smallest lambda.
LambdaSelection select_lambda(const std::vector<double>& grid, const std::vector<double>& scores);

}  // namespace face
