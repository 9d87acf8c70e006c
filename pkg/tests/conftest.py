import numpy as np

from conewalk.contacts import Contact, ContactSet


def rpy_matrix(roll, pitch, yaw):
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def rect_contacts(center, rpy=(0, 0, 0), size=(0.2, 0.1), mu=0.7, edges=4):
    """Four corner contacts of a rectangular patch, normal along its z axis."""
    center = np.asarray(center, dtype=float)
    R = rpy_matrix(*rpy)
    lx, ly = size[0] / 2.0, size[1] / 2.0
    corners = [(sx * lx, sy * ly, 0.0) for sx in (1, -1) for sy in (1, -1)]
    normal = R[:, 2] / np.linalg.norm(R[:, 2])
    return tuple(
        Contact(position=R @ np.array(c) + center, normal=normal, mu=mu, edges=edges)
        for c in corners
    )


def random_stance(rng, n_patches=None, tilt=0.5, mu=0.7, spread=0.4):
    """1-3 tilted rectangular patches, the acceptance-style random stance."""
    if n_patches is None:
        n_patches = int(rng.integers(1, 4))
    contacts = []
    for k in range(n_patches):
        center = np.array(
            [rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(0.0, 0.3)]
        )
        rpy = rng.uniform(-tilt, tilt, size=3)
        contacts.extend(rect_contacts(center, rpy, mu=mu))
    return ContactSet(tuple(contacts))
