#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clrt/expr.hpp"
#include "clrt/ivec.hpp"

namespace clrt {

// An ODE dx/dt = f(t, x) with a hand-derived Jacobian tape.  Both tapes are
// immutable after construction and evaluable on points, boxes, and jets.
struct OdeSystem {
    std::string name;
    int dim = 0;
    bool time_variant = false;
    std::map<std::string, double> params;
    Program f;    // dim outputs
    Program jac;  // dim*dim outputs, row-major
};

// Registered benchmark systems: brusselator, inverse_vdp, forced_vdp, dubins,
// cardiac, robot_arm, biology, poly12.
OdeSystem builtin(const std::string& name,
                  const std::map<std::string, double>& overrides = {});

std::vector<std::string> builtin_names();

// Default initial set each benchmark is usually run from.
struct InitialSet {
    Eigen::VectorXd center;
    Eigen::VectorXd radius;  // per dimension
};
InitialSet builtin_initial_set(const std::string& name);

IVector eval_f(const OdeSystem& sys, const Interval& t, const IVector& x);
IMatrix eval_jac(const OdeSystem& sys, const Interval& t, const IVector& x);

Eigen::VectorXd eval_f(const OdeSystem& sys, double t, const Eigen::VectorXd& x);
Eigen::MatrixXd eval_jac(const OdeSystem& sys, double t, const Eigen::VectorXd& x);

// System/override file: JSON {name, dim?, params?, initial_center?,
// initial_radius_per_dim?}.  Unknown params and shape mismatches are errors.
struct LoadedSystem {
    OdeSystem system;
    InitialSet initial;
};
LoadedSystem load_system_file(const std::string& path);

} // namespace clrt
