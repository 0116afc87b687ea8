#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "clrt/ivec.hpp"

namespace clrt {

// Right-hand sides are stored as flat expression tapes: a vector of nodes in
// dependency order, evaluated front to back.  The same tape runs on doubles,
// on intervals, and on interval Taylor jets (the recurrences the validated
// integrator is built on).
enum class Op : std::uint8_t {
    Const,  // value
    Var,    // state variable var
    Time,   // the independent variable t
    Add,    // a + b
    Sub,    // a - b
    Mul,    // a * b
    Div,    // a / b
    Neg,    // -a
    Sqr,    // a^2, evaluated as a tight even power on intervals
    Sin,    // sin a; b is the index of the paired Cos node
    Cos,    // cos a; b is the index of the paired Sin node
    Exp,    // exp a
    Sqrt,   // sqrt a
};

struct Node {
    Op op;
    int a = -1;
    int b = -1;
    int var = -1;
    double value = 0.0;
};

class Program {
public:
    int n_vars() const { return n_vars_; }
    bool uses_time() const { return uses_time_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<int>& outputs() const { return outputs_; }
    std::size_t n_outputs() const { return outputs_.size(); }

private:
    friend class TapeBuilder;
    int n_vars_ = 0;
    bool uses_time_ = false;
    std::vector<Node> nodes_;
    std::vector<int> outputs_;
};

class TapeBuilder;

// Lightweight handle used to write tapes with ordinary C++ expressions.
struct Expr {
    TapeBuilder* tb = nullptr;
    int idx = -1;
};

class TapeBuilder {
public:
    explicit TapeBuilder(int n_vars);

    Expr var(int i);
    Expr time();
    Expr num(double v);
    void output(Expr e);
    Program take();

    // Emits one node, reusing an existing identical node when possible.
    Expr emit(Op op, int a, int b, int var, double value);

private:
    Program prog_;
    std::map<std::array<std::int64_t, 4>, int> cse_;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(double a, Expr b);
Expr operator+(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator/(double a, Expr b);
Expr operator/(Expr a, double b);
Expr sqr(Expr a);
Expr pow(Expr a, int n);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);
Expr sqrt(Expr a);

// Point evaluation (used by samplers and finite-difference cross-checks).
Eigen::VectorXd eval(const Program& prog, double t, const Eigen::VectorXd& x);

// Conservative range enclosure over t x box.
IVector eval(const Program& prog, const Interval& t, const IVector& x);

// Taylor-coefficient propagation through a tape.  The caller supplies the
// state-variable coefficients one order at a time (for ODE solving these come
// from the recurrence x_{k+1} = f_k / (k+1)); the evaluator extends every
// node's jet to the same order.
class JetEvaluator {
public:
    explicit JetEvaluator(const Program& prog);

    // Starts a fresh jet: coefficient 0 of the variables is the box x0, the
    // time node expands around t (an interval so whole-step enclosures can be
    // seeded with [t0, t1]).
    void reset(const Interval& t, const IVector& x0);

    // Supplies coefficient order()+1 of every state variable and extends all
    // node jets to that order.
    void push_state_coeff(const IVector& xk);

    // k-th Taylor coefficient of each program output, k <= order().
    IVector output_coeff(int k) const;

    int order() const { return order_; }

private:
    const Program* prog_;
    std::vector<std::vector<Interval>> c_;
    int order_ = -1;

    void compute_coeff(int k);
};

} // namespace clrt
