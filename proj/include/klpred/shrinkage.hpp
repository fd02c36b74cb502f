#pragma once

#include <Eigen/Core>
#include <vector>

#include "klpred/model.hpp"

namespace klpred {

// Translate a prior so its point of attraction sits at b.  The flat prior
// is returned unchanged; for a subspace prior the base is recentered; for
// a mixture every component moves to b.
Prior recenter(const Prior& prior, const Eigen::VectorXd& b);

// Shrink toward the affine set {base center + basis c}.  basis is p x k
// with orthonormal columns (checked at validation); k = 0 returns the base
// unchanged.  The base must be a harmonic or scale-mixture prior.
Prior toward_subspace(const Prior& base, const Eigen::MatrixXd& basis);

// Mixture of translates of one base shape, one per center.  The resulting
// marginal shrinks adaptively toward whichever center dominates locally.
// A single center degenerates to recenter.
Prior multiple_shrinkage(const std::vector<Eigen::VectorXd>& centers,
                         const std::vector<double>& weights,
                         const Prior& base);

}  // namespace klpred
