#pragma once

#include "asset_sampler.hpp"
#include "commands.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "instructions.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "polygon.hpp"
#include "reward.hpp"
#include "rng.hpp"
#include "scene.hpp"
#include "scene_ops.hpp"
#include "ssr_io.hpp"
#include "vbl.hpp"
#include "voxel.hpp"

namespace ssrkit {
inline constexpr const char* kVersion = "0.1.0";
}
