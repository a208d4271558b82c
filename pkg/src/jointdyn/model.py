"""Planar beam FE assembly of jointed structures.

Members are straight, axis-aligned runs of 2-node Euler-Bernoulli elements
(3 DOFs per node: two translations and a rotation).  Jointed members are
modelled as separate beam lines whose matrices carry no coupling; they
interact only through node-to-node contact pairs and through bolt-preload
nodal forces.

Contact kinematics: the relative tangential displacement at a pair is the
difference of the surface-point displacements, which adds a rotation lever
arm (half the section height) to the translational DOF difference because
the member centroid lines are offset from the contact plane.  The relative
normal displacement is the plain transverse difference; positive values
mean penetration, which requires side a of each pair to sit on the negative
side of the interface along the normal axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .contact import ContactParams


class AssemblyError(ValueError):
    """Raised for inconsistent model definitions."""


@dataclass(frozen=True)
class BeamSection:
    """Material and cross-section data of one member.

    ``height`` locates the contact plane relative to the centroid line; when
    omitted it is derived from the rectangular relation ``h = sqrt(12 I/A)``.
    ``width`` converts per-area contact parameters into per-element values.
    """

    youngs_modulus: float
    density: float
    area: float
    second_moment: float
    height: float | None = None
    width: float | None = None

    def __post_init__(self):
        for name in ("youngs_modulus", "density", "area", "second_moment"):
            if getattr(self, name) <= 0:
                raise AssemblyError(f"section {name} must be strictly positive")

    @property
    def half_height(self) -> float:
        h = self.height
        if h is None:
            h = math.sqrt(12.0 * self.second_moment / self.area)
        return 0.5 * h

    @property
    def contact_width(self) -> float:
        if self.width is not None:
            return self.width
        h = self.height if self.height is not None else math.sqrt(
            12.0 * self.second_moment / self.area
        )
        return self.area / h


@dataclass(frozen=True)
class Segment:
    """A uniformly meshed stretch of a member."""

    length: float
    n_elements: int

    def __post_init__(self):
        if self.length <= 0 or self.n_elements < 1:
            raise AssemblyError("segment needs positive length and >= 1 elements")


@dataclass(frozen=True)
class Member:
    """Straight axis-aligned member built from consecutive segments.

    ``start`` is the (x, y) position of the first node; ``axis`` is ``'x'``
    or ``'y'``.  ``offset`` is the coordinate of the centroid line along the
    direction normal to the member axis and is used only to orient contact
    interfaces (stacking order and lever-arm signs).
    """

    name: str
    start: tuple[float, float]
    axis: str
    segments: tuple[Segment, ...]
    section: BeamSection

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise AssemblyError("member axis must be 'x' or 'y'")
        if not self.segments:
            raise AssemblyError("member needs at least one segment")

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def offset(self) -> float:
        return self.start[1] if self.axis == "x" else self.start[0]

    def node_positions(self) -> np.ndarray:
        """Axial coordinates of the member's nodes, from the start node."""
        pos = [0.0]
        for seg in self.segments:
            step = seg.length / seg.n_elements
            base = pos[-1]
            pos.extend(base + step * (i + 1) for i in range(seg.n_elements))
        return np.asarray(pos)


@dataclass(frozen=True)
class ContactPair:
    """One node-to-node Jenkins element across an interface.

    DOF indices refer to the free (post boundary condition) numbering.
    ``a_rot``/``b_rot`` with the signed ``lever_*`` arms add the rotation
    contribution of the surface point to the tangential kinematics; zero
    levers recover the plain DOF difference.
    """

    a_t: int
    a_n: int
    b_t: int
    b_n: int
    params: ContactParams
    a_rot: int = -1
    b_rot: int = -1
    lever_a: float = 0.0
    lever_b: float = 0.0
    position: float = 0.0
    interface: int = 0

    def __post_init__(self):
        ids = {self.a_t, self.a_n, self.b_t, self.b_n}
        if len(ids) != 4:
            raise AssemblyError("contact pair DOF indices must be distinct")


@dataclass(frozen=True)
class LoadCase:
    """Excitation amplitudes and frequency window of one analysis."""

    amplitudes: tuple[float, ...]
    omega_start: float
    omega_end: float
    n_harmonics: int
    n_points: int = 200

    def __post_init__(self):
        amps = self.amplitudes
        if not amps or any(a <= 0 for a in amps) or list(amps) != sorted(amps):
            raise AssemblyError("amplitudes must be positive and ascending")
        if not self.omega_start < self.omega_end:
            raise AssemblyError("frequency range must satisfy start < end")
        if self.n_harmonics < 1:
            raise AssemblyError("need at least one harmonic")

    def omega_grid(self) -> np.ndarray:
        return np.linspace(self.omega_start, self.omega_end, self.n_points)


@dataclass
class Mesh:
    """Node bookkeeping of the assembled model (full DOF numbering)."""

    coords: np.ndarray                 # (n_nodes, 2) global positions
    member_nodes: dict[str, np.ndarray]
    members: dict[str, Member]
    fixed_dofs: np.ndarray             # sorted full-numbering indices
    full_to_free: np.ndarray           # -1 for fixed

    def node_dofs(self, node: int) -> tuple[int, int, int]:
        return 3 * node, 3 * node + 1, 3 * node + 2

    def free_dof(self, node: int, comp: int) -> int:
        idx = self.full_to_free[3 * node + comp]
        if idx < 0:
            raise AssemblyError(f"DOF {comp} of node {node} is fixed")
        return int(idx)

    def find_node(self, member: str, local_pos: float, tol: float = 1e-9) -> int:
        m = self.members[member]
        pos = m.node_positions()
        j = int(np.argmin(np.abs(pos - local_pos)))
        if abs(pos[j] - local_pos) > max(tol, 1e-6 * max(m.length, 1.0)):
            raise AssemblyError(
                f"no node of member {member!r} at local position {local_pos}"
            )
        return int(self.member_nodes[member][j])


@dataclass
class Interface:
    """Pair index range plus geometry of one contact interface (reporting)."""

    name: str
    pair_slice: tuple[int, int]
    positions: np.ndarray


@dataclass
class JointedModel:
    """Assembled jointed structure: free matrices, contact table, loads."""

    n_dofs: int
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    damping: sp.csr_matrix
    contact_pairs: list[ContactPair] = field(default_factory=list)
    static_load: np.ndarray = None  # type: ignore[assignment]
    excitation_pattern: np.ndarray = None  # type: ignore[assignment]
    excitation_dof: int = -1
    mesh: Mesh | None = None
    interfaces: list[Interface] = field(default_factory=list)

    def __post_init__(self):
        if self.static_load is None:
            self.static_load = np.zeros(self.n_dofs)
        if self.excitation_pattern is None:
            self.excitation_pattern = np.zeros(self.n_dofs)
        for p in self.contact_pairs:
            self._check_pair(p)

    def _check_pair(self, p: ContactPair):
        idx = [p.a_t, p.a_n, p.b_t, p.b_n]
        if p.a_rot >= 0:
            idx.append(p.a_rot)
        if p.b_rot >= 0:
            idx.append(p.b_rot)
        if any(i < 0 or i >= self.n_dofs for i in idx):
            raise AssemblyError("contact pair DOF index out of range")

    @property
    def n_elements(self) -> int:
        return len(self.contact_pairs)

    def contact_selectors(self) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """Rows mapping free DOFs to relative (tangential, normal) motion.

        Returns sparse ``B_t``, ``B_n`` of shape (n_pairs, n): relative
        displacement is ``B @ u`` and element forces scatter back as
        ``B.T @ f``.
        """
        p = len(self.contact_pairs)
        rows_t, cols_t, vals_t = [], [], []
        rows_n, cols_n, vals_n = [], [], []
        for e, pair in enumerate(self.contact_pairs):
            rows_t += [e, e]
            cols_t += [pair.a_t, pair.b_t]
            vals_t += [1.0, -1.0]
            if pair.a_rot >= 0 and pair.lever_a != 0.0:
                rows_t.append(e)
                cols_t.append(pair.a_rot)
                vals_t.append(pair.lever_a)
            if pair.b_rot >= 0 and pair.lever_b != 0.0:
                rows_t.append(e)
                cols_t.append(pair.b_rot)
                vals_t.append(-pair.lever_b)
            rows_n += [e, e]
            cols_n += [pair.a_n, pair.b_n]
            vals_n += [1.0, -1.0]
        B_t = sp.csr_matrix((vals_t, (rows_t, cols_t)), shape=(p, self.n_dofs))
        B_n = sp.csr_matrix((vals_n, (rows_n, cols_n)), shape=(p, self.n_dofs))
        return B_t, B_n

    def contact_param_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        kt = np.array([p.params.kt for p in self.contact_pairs])
        kn = np.array([p.params.kn for p in self.contact_pairs])
        mu = np.array([p.params.mu for p in self.contact_pairs])
        return kt, kn, mu

    def stuck_contact_stiffness(self) -> sp.csr_matrix:
        """All-stick contact stiffness ``Bt' kt Bt + Bn' kn Bn``."""
        if not self.contact_pairs:
            return sp.csr_matrix((self.n_dofs, self.n_dofs))
        B_t, B_n = self.contact_selectors()
        kt, kn, _ = self.contact_param_arrays()
        return (B_t.T @ sp.diags(kt) @ B_t + B_n.T @ sp.diags(kn) @ B_n).tocsr()


def beam_element_matrices(section: BeamSection, L: float):
    """Local 6x6 stiffness/consistent-mass of a 2-node Euler-Bernoulli element.

    Local DOF order: (u1, w1, th1, u2, w2, th2) with linear axial and cubic
    Hermite transverse shape functions.
    """
    E, rho = section.youngs_modulus, section.density
    A, I = section.area, section.second_moment
    ka = E * A / L
    kb = E * I / L**3
    K = np.zeros((6, 6))
    K[np.ix_([0, 3], [0, 3])] = ka * np.array([[1, -1], [-1, 1]])
    Kb = kb * np.array(
        [
            [12, 6 * L, -12, 6 * L],
            [6 * L, 4 * L**2, -6 * L, 2 * L**2],
            [-12, -6 * L, 12, -6 * L],
            [6 * L, 2 * L**2, -6 * L, 4 * L**2],
        ]
    )
    K[np.ix_([1, 2, 4, 5], [1, 2, 4, 5])] = Kb

    m = rho * A * L
    M = np.zeros((6, 6))
    M[np.ix_([0, 3], [0, 3])] = (m / 6.0) * np.array([[2, 1], [1, 2]])
    Mb = (m / 420.0) * np.array(
        [
            [156, 22 * L, 54, -13 * L],
            [22 * L, 4 * L**2, 13 * L, -3 * L**2],
            [54, 13 * L, 156, -22 * L],
            [-13 * L, -3 * L**2, -22 * L, 4 * L**2],
        ]
    )
    M[np.ix_([1, 2, 4, 5], [1, 2, 4, 5])] = Mb
    return K, M


def _element_transform(axis: str) -> np.ndarray:
    """Local-to-global DOF map for an axis-aligned member.

    Members along x use the identity.  Members along y map local axial to
    global uy and local transverse to -ux (right-handed local frame).
    """
    if axis == "x":
        return np.eye(6)
    T = np.zeros((6, 6))
    c, s = 0.0, 1.0  # direction cosine/sine of the member axis
    for k in (0, 3):
        T[k, k] = c
        T[k, k + 1] = s
        T[k + 1, k] = -s
        T[k + 1, k + 1] = c
    T[2, 2] = T[5, 5] = 1.0
    return T


@dataclass(frozen=True)
class FixedDof:
    """One boundary condition: components of a node of a member."""

    member: str
    local_pos: float
    components: tuple[str, ...]  # subset of ('ux', 'uy', 'rot')


_COMP_INDEX = {"ux": 0, "uy": 1, "rot": 2}


def assemble_beam_model(
    members: list[Member],
    boundary_conditions: list[FixedDof] | None = None,
    connections: list[tuple[tuple[str, float], tuple[str, float]]] | None = None,
) -> JointedModel:
    """Assemble free K and M of separate beam lines and eliminate fixed DOFs.

    ``connections`` rigidly joins nodes of different members (e.g. the corner
    of an L-shaped bracket) by merging them; the listed local positions must
    resolve to coincident global coordinates.
    """
    if not members:
        raise AssemblyError("model needs at least one member")
    names = [m.name for m in members]
    if len(set(names)) != len(names):
        raise AssemblyError("duplicate member names")

    raw_coords = []
    raw_nodes: dict[str, np.ndarray] = {}
    for m in members:
        local = m.node_positions()
        ids = np.arange(len(local)) + len(raw_coords)
        raw_nodes[m.name] = ids
        for s in local:
            if m.axis == "x":
                raw_coords.append((m.start[0] + s, m.start[1]))
            else:
                raw_coords.append((m.start[0], m.start[1] + s))
    raw_coords = np.asarray(raw_coords)

    # merge rigidly connected nodes (union-find, smallest id wins)
    parent = np.arange(len(raw_coords))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    member_by_name = {m.name: m for m in members}
    for (ma, pa), (mb, pb) in connections or []:
        ia = raw_nodes[ma][_local_node_index(member_by_name[ma], pa)]
        ib = raw_nodes[mb][_local_node_index(member_by_name[mb], pb)]
        if not np.allclose(raw_coords[ia], raw_coords[ib], atol=1e-9):
            raise AssemblyError(
                f"connection {ma}@{pa} and {mb}@{pb} are not coincident"
            )
        ra, rb = find(ia), find(ib)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    roots = np.array([find(i) for i in range(len(raw_coords))])
    unique_roots, renumber = np.unique(roots, return_inverse=True)
    coords = raw_coords[unique_roots]
    member_nodes = {
        name: renumber[ids] for name, ids in raw_nodes.items()
    }
    n_full = 3 * len(coords)

    rows, cols, kv, mv = [], [], [], []
    for m in members:
        T = _element_transform(m.axis)
        nodes = member_nodes[m.name]
        local = m.node_positions()
        for j in range(len(nodes) - 1):
            L = float(local[j + 1] - local[j])
            Ke, Me = beam_element_matrices(m.section, L)
            Ke = T.T @ Ke @ T
            Me = T.T @ Me @ T
            dofs = [3 * nodes[j] + c for c in range(3)] + [
                3 * nodes[j + 1] + c for c in range(3)
            ]
            for r in range(6):
                for c in range(6):
                    rows.append(dofs[r])
                    cols.append(dofs[c])
                    kv.append(Ke[r, c])
                    mv.append(Me[r, c])
    K = sp.csr_matrix((kv, (rows, cols)), shape=(n_full, n_full))
    M = sp.csr_matrix((mv, (rows, cols)), shape=(n_full, n_full))

    mesh = Mesh(
        coords=coords,
        member_nodes=member_nodes,
        members={m.name: m for m in members},
        fixed_dofs=np.array([], dtype=int),
        full_to_free=np.arange(n_full),
    )
    fixed = set()
    for bc in boundary_conditions or []:
        node = mesh.find_node(bc.member, bc.local_pos)
        for comp in bc.components:
            fixed.add(3 * node + _COMP_INDEX[comp])
    fixed_arr = np.array(sorted(fixed), dtype=int)
    keep = np.setdiff1d(np.arange(n_full), fixed_arr)
    full_to_free = np.full(n_full, -1, dtype=int)
    full_to_free[keep] = np.arange(keep.size)
    mesh.fixed_dofs = fixed_arr
    mesh.full_to_free = full_to_free

    K = K[np.ix_(keep, keep)].tocsr()
    M = M[np.ix_(keep, keep)].tocsr()
    n = keep.size
    try:
        spla.splu(M.tocsc())
    except RuntimeError as exc:  # pragma: no cover - defensive
        raise AssemblyError(f"singular mass matrix: {exc}") from exc

    return JointedModel(
        n_dofs=n,
        stiffness=K,
        mass=M,
        damping=sp.csr_matrix((n, n)),
        mesh=mesh,
    )


def _tangential_normal_components(axis: str) -> tuple[int, int]:
    """(tangential, normal) translation components for an interface."""
    return (0, 1) if axis == "x" else (1, 0)


def define_interface(
    model: JointedModel,
    member_a: str,
    member_b: str,
    span: tuple[float, float],
    n_pairs: int,
    params_per_area: ContactParams,
    name: str | None = None,
    position_tol: float = 1e-9,
) -> JointedModel:
    """Append node-to-node contact pairs along a coincident span.

    ``params_per_area`` carries distributed stiffnesses (N/m per m^2); each
    pair is scaled by its tributary length times the section width.  Side a
    must be the member on the negative side of the interface along the
    normal axis so that positive relative normal displacement means
    penetration.
    """
    if model.mesh is None:
        raise AssemblyError("model carries no mesh; build it via assemble_beam_model")
    mesh = model.mesh
    ma, mb = mesh.members[member_a], mesh.members[member_b]
    if ma.axis != mb.axis:
        raise AssemblyError("interface members must be parallel")
    if n_pairs < 1:
        raise AssemblyError("need at least one contact pair")
    if ma.offset >= mb.offset:
        raise AssemblyError(
            "side a must lie on the negative-normal side of the interface "
            f"({member_a} offset {ma.offset} >= {member_b} offset {mb.offset})"
        )
    ha, hb = ma.section.half_height, mb.section.half_height
    gap = (mb.offset - ma.offset) - (ha + hb)
    if abs(gap) > 1e-6 * max(ha + hb, 1.0):
        raise AssemblyError(
            f"member surfaces do not touch along interface (gap {gap:.3e} m)"
        )

    lo, hi = span
    if n_pairs == 1:
        positions = np.array([0.5 * (lo + hi)])
        tributary = np.array([hi - lo])
    else:
        positions = np.linspace(lo, hi, n_pairs)
        step = (hi - lo) / (n_pairs - 1)
        tributary = np.full(n_pairs, step)
        tributary[[0, -1]] = 0.5 * step
    width = ma.section.contact_width

    start_a = ma.start[0] if ma.axis == "x" else ma.start[1]
    start_b = mb.start[0] if mb.axis == "x" else mb.start[1]
    t_comp, n_comp = _tangential_normal_components(ma.axis)
    # Surface-point tangential displacement: u_t - theta*dn for normal along
    # y, u_t + theta*dn for normal along x, with dn the signed offset from
    # the centroid to the contact plane.
    lever_sign = -1.0 if ma.axis == "x" else 1.0

    pairs = list(model.contact_pairs)
    iface_id = len(model.interfaces)
    for pos, trib in zip(positions, tributary):
        try:
            na = mesh.find_node(member_a, pos - start_a, tol=position_tol)
            nb = mesh.find_node(member_b, pos - start_b, tol=position_tol)
        except AssemblyError as exc:
            raise AssemblyError(f"interface pairing failed at {pos}: {exc}") from exc
        scale = trib * width
        pairs.append(
            ContactPair(
                a_t=mesh.free_dof(na, t_comp),
                a_n=mesh.free_dof(na, n_comp),
                b_t=mesh.free_dof(nb, t_comp),
                b_n=mesh.free_dof(nb, n_comp),
                a_rot=mesh.free_dof(na, 2),
                b_rot=mesh.free_dof(nb, 2),
                lever_a=lever_sign * ha,
                lever_b=lever_sign * (-hb),
                params=ContactParams(
                    kt=params_per_area.kt * scale,
                    kn=params_per_area.kn * scale,
                    mu=params_per_area.mu,
                ),
                position=float(pos),
                interface=iface_id,
            )
        )
    interfaces = list(model.interfaces)
    interfaces.append(
        Interface(
            name=name or f"{member_a}/{member_b}",
            pair_slice=(len(model.contact_pairs), len(pairs)),
            positions=positions,
        )
    )
    return replace(model, contact_pairs=pairs, interfaces=interfaces)


def apply_bolt_preload(
    model: JointedModel,
    interface: int | str,
    bolt_positions: list[float],
    force_per_bolt: float,
    tributary_width: float,
) -> JointedModel:
    """Add equal-and-opposite clamping forces around each bolt position.

    Each bolt's force is split uniformly over the contact-pair nodes lying
    within ``tributary_width`` (centered on the bolt) and pushes the two
    members together: positive normal force on side a, negative on side b.
    """
    iface = _resolve_interface(model, interface)
    lo, hi = iface.pair_slice
    pairs = model.contact_pairs[lo:hi]
    p0 = model.static_load.copy()
    for xb in bolt_positions:
        sel = [
            p for p in pairs if abs(p.position - xb) <= 0.5 * tributary_width + 1e-12
        ]
        if not sel:
            raise AssemblyError(f"no interface nodes within tributary of bolt at {xb}")
        share = force_per_bolt / len(sel)
        for p in sel:
            p0[p.a_n] += share
            p0[p.b_n] -= share
    return replace(model, static_load=p0)


def _resolve_interface(model: JointedModel, interface: int | str) -> Interface:
    if isinstance(interface, int):
        return model.interfaces[interface]
    for iface in model.interfaces:
        if iface.name == interface:
            return iface
    raise AssemblyError(f"unknown interface {interface!r}")


def set_excitation(
    model: JointedModel, member: str, local_pos: float, component: str = "uy"
) -> JointedModel:
    """Unit-magnitude excitation pattern at one DOF of a member node."""
    if model.mesh is None:
        raise AssemblyError("model carries no mesh")
    node = model.mesh.find_node(member, local_pos)
    dof = model.mesh.free_dof(node, _COMP_INDEX[component])
    pattern = np.zeros(model.n_dofs)
    pattern[dof] = 1.0
    return replace(model, excitation_pattern=pattern, excitation_dof=dof)


def assemble_damping(
    model: JointedModel,
    mode: str,
    zeta: float,
    anchor_frequencies: tuple[float, float] | None = None,
    K_l: sp.spmatrix | None = None,
) -> JointedModel:
    """Build the damping matrix: Rayleigh fit or uniform modal damping.

    Rayleigh solves ``zeta = (a/w + b*w)/2`` at both anchors and sets
    ``C = a*M + b*K_l`` (falling back to the free K when no linearized
    stiffness is supplied).  Modal damping assembles
    ``C = M Phi diag(2 zeta w_i) Phi^T M`` from the full eigenbasis of the
    linearized, preclamped structure.
    """
    if zeta == 0.0:
        return replace(model, damping=sp.csr_matrix((model.n_dofs, model.n_dofs)))
    Kd = (K_l if K_l is not None else model.stiffness).tocsr()
    if mode == "rayleigh":
        if anchor_frequencies is None:
            raise AssemblyError("rayleigh damping needs anchor frequencies")
        wa, wb = anchor_frequencies
        if not 0 < wa < wb:
            raise AssemblyError("anchors must satisfy 0 < w_a < w_b")
        A = 0.5 * np.array([[1.0 / wa, wa], [1.0 / wb, wb]])
        a, b = np.linalg.solve(A, np.array([zeta, zeta]))
        C = (a * model.mass + b * Kd).tocsr()
    elif mode == "modal":
        import scipy.linalg as la

        Md = model.mass.toarray()
        evals, Phi = la.eigh(Kd.toarray(), Md)
        omegas = np.sqrt(np.clip(evals, 0.0, None))
        MPhi = Md @ Phi
        C = sp.csr_matrix(MPhi @ np.diag(2.0 * zeta * omegas) @ MPhi.T)
    else:
        raise AssemblyError(f"unknown damping mode {mode!r}")
    return replace(model, damping=C)
