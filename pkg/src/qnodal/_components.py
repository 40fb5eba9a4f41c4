"""Connected-component labelling on periodic grids (4-neighbour)."""
import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def label_periodic(mask, wrap0=False, wrap1=False):
    """Label 4-connected components of ``mask`` with optional wrap-around.

    Returns ``(labels, count)``; ``labels`` is 0 off the mask and uses
    consecutive ids ``1..count`` on it.
    """
    labels, n = ndimage.label(mask)
    if n == 0 or not (wrap0 or wrap1):
        return labels, n
    pairs = []
    if wrap0:
        a, b = labels[-1, :], labels[0, :]
        keep = (a > 0) & (b > 0)
        pairs.append(np.stack([a[keep], b[keep]]))
    if wrap1:
        a, b = labels[:, -1], labels[:, 0]
        keep = (a > 0) & (b > 0)
        pairs.append(np.stack([a[keep], b[keep]]))
    edges = np.concatenate(pairs, axis=1)
    if edges.shape[1] == 0:
        return labels, n
    graph = coo_matrix((np.ones(edges.shape[1]), (edges[0], edges[1])), shape=(n + 1, n + 1))
    count, comp = connected_components(graph, directed=False)
    # comp[0] belongs to the background node, which has no edges
    remap = np.zeros(n + 1, dtype=np.int64)
    _, dense = np.unique(comp[1:], return_inverse=True)
    remap[1:] = dense + 1
    return remap[labels], int(dense.max() + 1)
