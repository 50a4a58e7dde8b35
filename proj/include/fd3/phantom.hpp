#pragma once

#include "fd3/image.hpp"
#include "fd3/random.hpp"

namespace fd3 {

// Synthetic good-quality fundus photograph: circular field of view on black,
// reddish-orange retina with mild vignetting, a bright optic disc, a darker
// macula and a branching vessel tree leaving the disc.
Image make_phantom(int size, Rng& rng);

}  // namespace fd3
