from app.models.models import (
    Tetrahedron, SquaredDistances, FacialAreas, NaturalParams, InverseParams,
    PluckerVector, MNPair, TauTable, Tau, EDGES, FACES, NATURAL_KEYS,
)
