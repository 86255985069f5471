#pragma once

// Umbrella header.

#include "diffwave/dictionary_io.hpp"
#include "diffwave/error.hpp"
#include "diffwave/evaluation.hpp"
#include "diffwave/experiment.hpp"
#include "diffwave/geodesic.hpp"
#include "diffwave/laplacian.hpp"
#include "diffwave/matching.hpp"
#include "diffwave/mesh.hpp"
#include "diffwave/sampling.hpp"
#include "diffwave/shapes.hpp"
#include "diffwave/sparse_solve.hpp"
#include "diffwave/spectral.hpp"
#include "diffwave/spectrum.hpp"
#include "diffwave/wavelets.hpp"
