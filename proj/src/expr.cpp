#include "clrt/expr.hpp"

#include <bit>
#include <utility>

#include "clrt/errors.hpp"

namespace clrt {

TapeBuilder::TapeBuilder(int n_vars) {
    if (n_vars < 0) throw BadParameter("negative variable count");
    prog_.n_vars_ = n_vars;
}

Expr TapeBuilder::emit(Op op, int a, int b, int var, double value) {
    // Commutative operands in canonical order so x*y and y*x share a node.
    if ((op == Op::Add || op == Op::Mul) && a > b) std::swap(a, b);

    std::array<std::int64_t, 4> key = {
        static_cast<std::int64_t>(op), a, b,
        op == Op::Const ? static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(value))
                        : static_cast<std::int64_t>(var)};
    auto it = cse_.find(key);
    if (it != cse_.end()) return Expr{this, it->second};

    if (op == Op::Sin || op == Op::Cos) {
        // Sin and cos jets need each other's coefficients, so the pair is
        // always materialized together with mutual links in b.
        int s = static_cast<int>(prog_.nodes_.size());
        int c = s + 1;
        prog_.nodes_.push_back(Node{Op::Sin, a, c, -1, 0.0});
        prog_.nodes_.push_back(Node{Op::Cos, a, s, -1, 0.0});
        cse_[{static_cast<std::int64_t>(Op::Sin), a, c, -1}] = s;
        cse_[{static_cast<std::int64_t>(Op::Cos), a, s, -1}] = c;
        return Expr{this, op == Op::Sin ? s : c};
    }

    int idx = static_cast<int>(prog_.nodes_.size());
    prog_.nodes_.push_back(Node{op, a, b, var, value});
    cse_[key] = idx;
    if (op == Op::Time) prog_.uses_time_ = true;
    return Expr{this, idx};
}

Expr TapeBuilder::var(int i) {
    if (i < 0 || i >= prog_.n_vars_) throw BadParameter("variable index out of range");
    return emit(Op::Var, -1, -1, i, 0.0);
}

Expr TapeBuilder::time() { return emit(Op::Time, -1, -1, -1, 0.0); }

Expr TapeBuilder::num(double v) { return emit(Op::Const, -1, -1, -1, v); }

void TapeBuilder::output(Expr e) {
    if (e.tb != this || e.idx < 0) throw BadParameter("expression from another tape");
    prog_.outputs_.push_back(e.idx);
}

Program TapeBuilder::take() { return std::move(prog_); }

namespace {

Expr binary(Op op, Expr a, Expr b) {
    if (a.tb != b.tb || a.tb == nullptr) throw BadParameter("expressions from different tapes");
    return a.tb->emit(op, a.idx, b.idx, -1, 0.0);
}

} // namespace

Expr operator+(Expr a, Expr b) { return binary(Op::Add, a, b); }
Expr operator-(Expr a, Expr b) { return binary(Op::Sub, a, b); }
Expr operator*(Expr a, Expr b) { return binary(Op::Mul, a, b); }
Expr operator/(Expr a, Expr b) { return binary(Op::Div, a, b); }
Expr operator-(Expr a) { return a.tb->emit(Op::Neg, a.idx, -1, -1, 0.0); }
Expr operator+(double a, Expr b) { return b.tb->num(a) + b; }
Expr operator+(Expr a, double b) { return a + a.tb->num(b); }
Expr operator-(double a, Expr b) { return b.tb->num(a) - b; }
Expr operator-(Expr a, double b) { return a - a.tb->num(b); }
Expr operator*(double a, Expr b) { return b.tb->num(a) * b; }
Expr operator*(Expr a, double b) { return a * a.tb->num(b); }
Expr operator/(double a, Expr b) { return b.tb->num(a) / b; }
Expr operator/(Expr a, double b) { return a / a.tb->num(b); }
Expr sqr(Expr a) { return a.tb->emit(Op::Sqr, a.idx, -1, -1, 0.0); }
Expr sin(Expr a) { return a.tb->emit(Op::Sin, a.idx, -1, -1, 0.0); }
Expr cos(Expr a) { return a.tb->emit(Op::Cos, a.idx, -1, -1, 0.0); }
Expr exp(Expr a) { return a.tb->emit(Op::Exp, a.idx, -1, -1, 0.0); }
Expr sqrt(Expr a) { return a.tb->emit(Op::Sqrt, a.idx, -1, -1, 0.0); }

Expr pow(Expr a, int n) {
    if (n < 0) throw BadParameter("negative integer power");
    if (n == 0) return a.tb->num(1.0);
    if (n == 1) return a;
    if (n % 2 == 0) return sqr(pow(a, n / 2));
    return pow(a, n - 1) * a;
}

Eigen::VectorXd eval(const Program& prog, double t, const Eigen::VectorXd& x) {
    check_same_size(static_cast<std::size_t>(prog.n_vars()),
                    static_cast<std::size_t>(x.size()), "tape eval");
    std::vector<double> v(prog.nodes().size());
    for (std::size_t i = 0; i < prog.nodes().size(); ++i) {
        const Node& nd = prog.nodes()[i];
        switch (nd.op) {
            case Op::Const: v[i] = nd.value; break;
            case Op::Var: v[i] = x[nd.var]; break;
            case Op::Time: v[i] = t; break;
            case Op::Add: v[i] = v[nd.a] + v[nd.b]; break;
            case Op::Sub: v[i] = v[nd.a] - v[nd.b]; break;
            case Op::Mul: v[i] = v[nd.a] * v[nd.b]; break;
            case Op::Div: v[i] = v[nd.a] / v[nd.b]; break;
            case Op::Neg: v[i] = -v[nd.a]; break;
            case Op::Sqr: v[i] = v[nd.a] * v[nd.a]; break;
            case Op::Sin: v[i] = std::sin(v[nd.a]); break;
            case Op::Cos: v[i] = std::cos(v[nd.a]); break;
            case Op::Exp: v[i] = std::exp(v[nd.a]); break;
            case Op::Sqrt: v[i] = std::sqrt(v[nd.a]); break;
        }
    }
    Eigen::VectorXd out(prog.n_outputs());
    for (std::size_t i = 0; i < prog.n_outputs(); ++i) out[i] = v[prog.outputs()[i]];
    return out;
}

IVector eval(const Program& prog, const Interval& t, const IVector& x) {
    check_same_size(static_cast<std::size_t>(prog.n_vars()), x.size(), "tape eval");
    std::vector<Interval> v(prog.nodes().size());
    for (std::size_t i = 0; i < prog.nodes().size(); ++i) {
        const Node& nd = prog.nodes()[i];
        switch (nd.op) {
            case Op::Const: v[i] = Interval(nd.value); break;
            case Op::Var: v[i] = x[nd.var]; break;
            case Op::Time: v[i] = t; break;
            case Op::Add: v[i] = v[nd.a] + v[nd.b]; break;
            case Op::Sub: v[i] = v[nd.a] - v[nd.b]; break;
            case Op::Mul: v[i] = v[nd.a] * v[nd.b]; break;
            case Op::Div: v[i] = v[nd.a] / v[nd.b]; break;
            case Op::Neg: v[i] = -v[nd.a]; break;
            case Op::Sqr: v[i] = powi(v[nd.a], 2); break;
            case Op::Sin: v[i] = sin(v[nd.a]); break;
            case Op::Cos: v[i] = cos(v[nd.a]); break;
            case Op::Exp: v[i] = exp(v[nd.a]); break;
            case Op::Sqrt: v[i] = sqrt(v[nd.a]); break;
        }
    }
    IVector out(prog.n_outputs());
    for (std::size_t i = 0; i < prog.n_outputs(); ++i) out[i] = v[prog.outputs()[i]];
    return out;
}

JetEvaluator::JetEvaluator(const Program& prog) : prog_(&prog), c_(prog.nodes().size()) {}

void JetEvaluator::reset(const Interval& t, const IVector& x0) {
    check_same_size(static_cast<std::size_t>(prog_->n_vars()), x0.size(), "jet reset");
    for (auto& jet : c_) jet.clear();
    order_ = -1;
    for (std::size_t i = 0; i < prog_->nodes().size(); ++i) {
        const Node& nd = prog_->nodes()[i];
        Interval v;
        switch (nd.op) {
            case Op::Const: v = Interval(nd.value); break;
            case Op::Var: v = x0[nd.var]; break;
            case Op::Time: v = t; break;
            case Op::Add: v = c_[nd.a][0] + c_[nd.b][0]; break;
            case Op::Sub: v = c_[nd.a][0] - c_[nd.b][0]; break;
            case Op::Mul: v = c_[nd.a][0] * c_[nd.b][0]; break;
            case Op::Div: v = c_[nd.a][0] / c_[nd.b][0]; break;
            case Op::Neg: v = -c_[nd.a][0]; break;
            case Op::Sqr: v = powi(c_[nd.a][0], 2); break;
            case Op::Sin: v = sin(c_[nd.a][0]); break;
            case Op::Cos: v = cos(c_[nd.a][0]); break;
            case Op::Exp: v = exp(c_[nd.a][0]); break;
            case Op::Sqrt: v = sqrt(c_[nd.a][0]); break;
        }
        c_[i].push_back(v);
    }
    order_ = 0;
}

void JetEvaluator::push_state_coeff(const IVector& xk) {
    check_same_size(static_cast<std::size_t>(prog_->n_vars()), xk.size(), "jet push");
    int k = order_ + 1;
    for (std::size_t i = 0; i < prog_->nodes().size(); ++i) {
        const Node& nd = prog_->nodes()[i];
        if (nd.op == Op::Var) {
            c_[i].push_back(xk[nd.var]);
        } else {
            c_[i].push_back(Interval(0.0));
        }
    }
    compute_coeff(k);
    order_ = k;
}

void JetEvaluator::compute_coeff(int k) {
    const Interval zero(0.0);
    for (std::size_t i = 0; i < prog_->nodes().size(); ++i) {
        const Node& nd = prog_->nodes()[i];
        const std::vector<Interval>* u = nd.a >= 0 ? &c_[nd.a] : nullptr;
        const std::vector<Interval>* w = nd.b >= 0 ? &c_[nd.b] : nullptr;
        Interval r = zero;
        switch (nd.op) {
            case Op::Const:
            case Op::Var:
                continue; // already filled
            case Op::Time:
                if (k == 1) c_[i][k] = Interval(1.0);
                continue;
            case Op::Add:
                r = (*u)[k] + (*w)[k];
                break;
            case Op::Sub:
                r = (*u)[k] - (*w)[k];
                break;
            case Op::Mul:
                for (int j = 0; j <= k; ++j) r += (*u)[j] * (*w)[k - j];
                break;
            case Op::Div:
                // q_k = (u_k - sum_{j<k} q_j w_{k-j}) / w_0
                r = (*u)[k];
                for (int j = 0; j < k; ++j) r -= c_[i][j] * (*w)[k - j];
                r = r / (*w)[0];
                break;
            case Op::Neg:
                r = -(*u)[k];
                break;
            case Op::Sqr:
                // Pair off symmetric convolution terms; the middle term of an
                // even index is a tight square.
                for (int j = 0; 2 * j < k; ++j) r += Interval(2.0) * ((*u)[j] * (*u)[k - j]);
                if (k % 2 == 0) r += powi((*u)[k / 2], 2);
                break;
            case Op::Sin:
                // s_k = (1/k) sum_{j>=1} j u_j c_{k-j}, with c the cos sibling
                for (int j = 1; j <= k; ++j) {
                    r += Interval(static_cast<double>(j)) * ((*u)[j] * c_[nd.b][k - j]);
                }
                r = r / Interval(static_cast<double>(k));
                break;
            case Op::Cos:
                for (int j = 1; j <= k; ++j) {
                    r -= Interval(static_cast<double>(j)) * ((*u)[j] * c_[nd.b][k - j]);
                }
                r = r / Interval(static_cast<double>(k));
                break;
            case Op::Exp:
                for (int j = 1; j <= k; ++j) {
                    r += Interval(static_cast<double>(j)) * ((*u)[j] * c_[i][k - j]);
                }
                r = r / Interval(static_cast<double>(k));
                break;
            case Op::Sqrt:
                // s_k = (u_k - sum_{0<j<k} s_j s_{k-j}) / (2 s_0)
                r = (*u)[k];
                for (int j = 1; j < k; ++j) r -= c_[i][j] * c_[i][k - j];
                r = r / (Interval(2.0) * c_[i][0]);
                break;
        }
        c_[i][k] = r;
    }
}

IVector JetEvaluator::output_coeff(int k) const {
    if (k < 0 || k > order_) throw BadParameter("jet coefficient out of range");
    IVector out(prog_->n_outputs());
    for (std::size_t i = 0; i < prog_->n_outputs(); ++i) {
        out[i] = c_[prog_->outputs()[i]][k];
    }
    return out;
}

} // namespace clrt
