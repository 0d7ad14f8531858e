from .mesh import MESH_CONFIGS, FemMesh, build_mesh, rescale_mesh
from .solve import (CrackSolver, FemSolution, extract_opening, extract_sif,
                    principal_stresses, solve_crack)

__all__ = [
    "FemMesh",
    "build_mesh",
    "rescale_mesh",
    "MESH_CONFIGS",
    "CrackSolver",
    "FemSolution",
    "solve_crack",
    "extract_opening",
    "extract_sif",
    "principal_stresses",
]
