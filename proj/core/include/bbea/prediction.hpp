#pragma once

namespace bbea {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};

}  // namespace bbea
