"""Frequency-domain solver suite for jointed structures with frictional contact.

Subpackages cover the full pipeline: planar beam model assembly with
node-to-node friction elements (:mod:`jointdyn.model`), the Jenkins contact
kernel (:mod:`jointdyn.contact`), multi-harmonic balance with AFT
(:mod:`jointdyn.harmonics`, :mod:`jointdyn.aft`, :mod:`jointdyn.hbm`),
static/modal preliminaries (:mod:`jointdyn.preliminary`), the augmented
Jacobian-projection reduced model (:mod:`jointdyn.rom`), ECSW hyper-reduction
(:mod:`jointdyn.ecsw`) and the residual error indicator
(:mod:`jointdyn.errors`).
"""

__version__ = "0.1.0"
