#include "warplab/fem.hpp"
#include "warplab/radial.hpp"
#include <cstdio>
int main(){ using namespace warplab; auto p = WarpingProfile::make(ProfileKind::SpaceformHyperbolic, {.n=2}); std::printf("sinh(1)=%.6f\n", p.theta(1.0)); return 0; }
