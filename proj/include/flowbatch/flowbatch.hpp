#pragma once
// Umbrella header for the flowbatch library: a deterministic simulator of a
// three-stage flowshop batch plant, binary schedule encoding, GA/DE baseline
// optimizers, an RBF surrogate with its evaluation archive, the
// surrogate-assisted optimization framework, trial quality metrics, and the
// experiment harness.

#include "flowbatch/encoding.hpp"
#include "flowbatch/evolutionary.hpp"
#include "flowbatch/harness.hpp"
#include "flowbatch/metrics.hpp"
#include "flowbatch/plant.hpp"
#include "flowbatch/psaf.hpp"
#include "flowbatch/rng.hpp"
#include "flowbatch/sim.hpp"
#include "flowbatch/surrogate.hpp"
