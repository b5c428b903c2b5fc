use serde::Serialize;

use super::Suite;

/// One checkable identity: stable id, the formula it checks and the default
/// tolerance on its relative residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Identity {
    pub id: &'static str,
    pub suite: Suite,
    pub anchor: &'static str,
    pub tolerance: f64,
}

const fn id(id: &'static str, suite: Suite, anchor: &'static str, tolerance: f64) -> Identity {
    Identity { id, suite, anchor, tolerance }
}

use Suite::{Algebra as A, ConformalIntegral as I, ConformalPointwise as P, CurvatureIdentities as C, Newton as N};

pub const CATALOG: &[Identity] = &[
    id("adjointness", A, "<g^r w, e> = <w, c^r e>", 1e-12),
    id("star-involution", A, "**w = w for (p,p) forms", 1e-12),
    id("star-conjugation-g", A, "*c^r*w = g^r w", 1e-12),
    id("star-conjugation-c", A, "*g^r*w = c^r w", 1e-12),
    id("determinant-law", A, "h^k(x_1..x_k; y_1..y_k) = k! det[h(x_i, y_j)]", 1e-12),
    id("metric-power-contraction", A, "c^r g^m = [m!/(m-r)!] [(n-m+r)!/(n-m)!] g^(m-r)", 1e-12),
    id("product-associativity", A, "(a b) c = a (b c)", 1e-12),
    id("gauss-tensor-bianchi", A, "h^2 satisfies the first Bianchi identity", 1e-12),
    id("gauss-bonnet-two-expressions", C, "h_2k = *(g^(n-2k) R^k)/(n-2k)! = c^(2k) R^k/(2k)!", 1e-9),
    id("lovelock-two-expressions", C, "T_2k = h_2k g - c^(2k-1) R^k/(2k-1)! = *(g^(n-2k-1) R^k)/(n-2k-1)!", 1e-9),
    id("lovelock-top-vanishes", C, "T_n = 0", 1e-8),
    id("sigma-two-expressions", C, "sigma_k(h) = c^k h^k/(k!)^2 = *(g^(n-k) h^k)/((n-k)! k!)", 1e-9),
    id("sigma-eigenvalues", C, "sigma_k(h) = e_k(eigenvalues of h)", 1e-9),
    id("sigma1-scal", C, "sigma_1 = c A = Scal/(2(n-1))", 1e-10),
    id("schouten-weyl-split", C, "R = W + g A, c W = 0", 1e-10),
    id("sigma-weyl-split", C, "h_2k = [(n-k)! k!/(n-2k)!] sigma_k + sum_{i<k} C(k,i)/(n-2k)! <*(g^(n-2k+i) A^i), W^(k-i)>", 1e-8),
    id("conformally-flat-clause", C, "W = 0 implies h_2k = [(n-k)! k!/(n-2k)!] sigma_k", 1e-10),
    id("h4-weyl-sigma2", C, "h_4 = |W|^2 + 2(n-2)(n-3) sigma_2", 1e-9),
    id("sigma2-quadratic", C, "2(n-2)^2 sigma_2 = [n/(4(n-1))] |c^2 R|^2 - |c R|^2", 1e-9),
    id("einstein-sigma2", C, "Einstein implies sigma_2 = Scal^2/(8n(n-1))", 1e-10),
    id("conformal-flatness-deficiency", C, "|R|^2 - |cR|^2/(n-2) + |c^2R|^2/(2(n-1)(n-2)) = |W|^2", 1e-9),
    id("space-form-deficiency", C, "constant curvature implies |R|^2 - |c^2R|^2/(2n(n-1)) = 0", 1e-10),
    id("sphere-h4", C, "h_4(S^n(1)) = n!/(4(n-4)!)", 1e-10),
    id("product-h4-law", C, "h_4(g_1 x g_2) = h_4(g_1) + Scal_1 Scal_2/2 + h_4(g_2)", 1e-9),
    id("sign-min-sectional", C, "S^3(r) x S^2: sectional curvature >= 0", 1e-12),
    id("sign-min-ricci", C, "S^3(r) x S^2: Ric > 0", 0.0),
    id("sign-min-einstein", C, "S^3(r) x S^2: T_2 = Scal g/2 - Ric > 0", 0.0),
    id("sign-h4", C, "S^3(r) x S^2: h_4 > 0", 0.0),
    id("sign-sigma2", C, "S^3(r) x S^2, r small: sigma_2 < 0", 0.0),
    id("newton-explicit-curvature", N, "N_k(w) = sum_{r=pk-p}^{pk} (-1)^(r+pk) g^(p-pk+r) c^r w^k/((p-pk+r)! r!), w = R", 1e-9),
    id("newton-explicit-bilinear", N, "N_k(w) = sum_{r=pk-p}^{pk} (-1)^(r+pk) g^(p-pk+r) c^r w^k/((p-pk+r)! r!), w = h", 1e-9),
    id("newton-classic", N, "N_k(h) = k! t_k(h), t_k = sigma_k g - c^(k-1) h^k/((k-1)! k!)", 1e-9),
    id("newton-trace-free", N, "N_1(w) = w for trace-free Bianchi (2,2) forms", 1e-10),
    id("newton-formula", N, "<N_k(w), w> = c^(pk+p) w^(k+1)/(pk+p)!", 1e-9),
    id("gauss-bonnet-newton", N, "h_(2k+2) = <N_k(R), R>", 1e-9),
    id("avez-type", N, "h_(2k+2) = <c^(2k-2) R^k/(2k-2)!, R> - <c^(2k-1) R^k/(2k-1)!, cR> + h_2k h_2", 1e-9),
    id("avez-classic", N, "h_4 = |R|^2 - |cR|^2 + |c^2 R|^2/4", 1e-9),
    id("pq-einstein", N, "c^(2k-2) R^k ~ g^2 implies h_(2k+2) = [2k(2k-1)/(n(n-1)) + (n-4k)/n] h_2k h_2", 1e-9),
    id("trace-relation-1", N, "c N_k(R) = (n-2k-1) T_2k", 1e-9),
    id("trace-relation-2", N, "c^2 N_k(R) = (n-2k)(n-2k-1) h_2k", 1e-9),
    id("gnf", N, "c^(p+k)(w h^k)/(p+k)! = <*(g^(n-p-k) w)/(n-p-k)!, h^k>", 1e-9),
    id("sphere-chart-curvature", P, "stereographic S^n(1) chart: R = g^2/2", 1e-6),
    id("sphere-chart-convergence", P, "error ratio under step halving = 2^order", 0.25),
    id("conformal-h4-law", P, "e^(4f) h_4(e^(2f) g) = h_4(g) + L_g(f)", 1e-4),
    id("conformal-weyl-law", P, "W(e^(2f) g) = e^(2f) W(g)", 1e-4),
    id("conformal-riemann-law", P, "R(e^(2f) g) = e^(2f) (R - g H), H = Hess f - df df + |df|^2 g/2", 1e-4),
    id("conformal-volume-law", P, "mu(e^(2f) g) = e^(nf) mu(g)", 1e-12),
    id("power-law", P, "v^((n+12)/(n-4)) h_4(v^(8/(n-4)) g) = h_4 v + 8(n-3) L_g(v)/(n-4)", 1e-4),
    id("k-equation", P, "v^((n+12)/(n-4)) h_4(v^(8/(n-4)) g) = 8(n-3) K_g(v)/(n-4), K_g(v) = L_g(v) + (n-4) h_4 v/(8(n-3))", 1e-4),
    id("cocycle", P, "L_g(f + phi) - L_g(f) = e^(4f) L_(e^(2f) g)(phi)", 1e-3),
    id("cocycle-trivial", P, "L_g(f + 0) - L_g(f) = 0", 0.0),
    id("bidegree-covariance", P, "K_(a^2 g)(phi) = a^(-(n+12)/4) K_g(a^((n-4)/4) phi)", 1e-3),
    id("bidegree-trivial", P, "K_(a^2 g)(phi) = a^(-(n+12)/4) K_g(a^((n-4)/4) phi), a = 1", 1e-14),
    id("bidegree-homothety", P, "K_(a^2 g)(phi) = a^(-(n+12)/4) K_g(a^((n-4)/4) phi), a = 2", 1e-10),
    id("bochner-sigma2", I, "int 2 sigma_2(Hess f) mu = int Ric(grad f, grad f) mu", 1e-6),
    id("hessian-gradient", I, "int 2 Hess f(grad f, grad f) mu = int |df|^2 Delta f mu", 1e-6),
    id("conformal-operator-mean", I, "n = 4: int L_g(f) mu = 0", 1e-6),
    id("total-h4-conformal-invariance", I, "n = 4: int h_4(e^(2f) g) mu_(e^(2f) g) = int h_4 mu", 1e-6),
    id("total-h4-power", I, "int hbar_4 mubar = int {v^4 h_4 + 16(n-3)/(n-4) v^2 T_2(grad v, grad v) + 16(n-2)(n-3)/(n-4)^3 A(v)} mu", 1e-5),
    id("ricci-change-as-displayed", I, "(n-4) int v^2 (Ricbar - Ric)(grad v, grad v) mu = -2 int {(n-4) v|dv|^2 Delta v^2 - 4|dv|^4} mu + 4(n-1) int |dv|^4 mu", 1e-5),
    id("ricci-change-total-functional", I, "(n-4) int v^2 (Ricbar - Ric)(grad v, grad v) mu = -A(v) + 4(n-1) int |dv|^4 mu, A(v) = int {(n-4)|dv|^2 Delta v^2 - 4|dv|^4} mu", 1e-5),
];

/// Catalog entry for `id`. Panics on an unknown id (a programming error).
pub fn identity(id: &str) -> &'static Identity {
    CATALOG.iter().find(|i| i.id == id).unwrap_or_else(|| panic!("identity {id} is not in the catalog"))
}

pub fn identities(suite: Suite) -> impl Iterator<Item = &'static Identity> {
    CATALOG.iter().filter(move |i| suite == Suite::All || i.suite == suite)
}
