#pragma once

// Convenience header pulling in the whole library.

#include <sfsn/core.hpp>
#include <sfsn/dataset.hpp>
#include <sfsn/degrade.hpp>
#include <sfsn/fidelity.hpp>
#include <sfsn/image_io.hpp>
#include <sfsn/naturalness.hpp>
#include <sfsn/pyramid.hpp>
#include <sfsn/score.hpp>
#include <sfsn/stats.hpp>
