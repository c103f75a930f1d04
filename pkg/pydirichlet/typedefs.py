import numpy as np
from numpy.typing import NDArray

type FloatArray = NDArray[np.float64]
type Eigenvalues = FloatArray
"""λ vectors, last axis has length n (anything in front of it is a stack of nodes or samples)"""
type GridField = FloatArray
"""One value per node of a ChartGrid, in the grid's flat node order"""
type TensorField = FloatArray
"""Shape (nodes, n, n), chart components of a symmetric 2-tensor at every node"""
type Mask = NDArray[np.bool_]
type NodeIndex = int
"""Index into the flat node order of a ChartGrid"""
