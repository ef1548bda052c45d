#pragma once

#include <cstdint>

#include "mbhoming/mushroom_body.hpp"
#include "mbhoming/optic_lobe.hpp"
#include "mbhoming/world.hpp"

namespace mbhoming {

// Camera + optic lobe + mushroom body: everything between the world and the
// premotor stage.
class VisualPipeline {
public:
    VisualPipeline(const RenderConfig& render, const VisionConfig& vision, const NetworkConfig& net,
                   std::uint64_t net_seed)
        : render_(render), vision_(vision), mb_(vision.pn_count(), net, net_seed) {
        render_.validate();
        vision_.validate();
    }

    const RenderConfig& render_config() const noexcept { return render_; }
    const VisionConfig& vision_config() const noexcept { return vision_; }
    const MushroomBody& mushroom_body() const noexcept { return mb_; }
    MushroomBody& mushroom_body() noexcept { return mb_; }

    PanoramicView look(const World& world, Vec2 pos, double heading) const {
        return render_panorama(world, pos, heading, render_);
    }

    HemisphereCodes perceive(const World& world, Vec2 pos, double heading) const {
        return mb_.encode(process(look(world, pos, heading), vision_));
    }

    FamiliarityReadout familiarity(const World& world, Vec2 pos, double heading) const {
        return mb_.readout(perceive(world, pos, heading));
    }

private:
    RenderConfig render_;
    VisionConfig vision_;
    MushroomBody mb_;
};

} // namespace mbhoming
