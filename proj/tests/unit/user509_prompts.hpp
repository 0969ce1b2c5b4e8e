#pragma once

// Worked-example prompts for user 509 (five most recent
// ratings), copied verbatim.

#include <string>

#include "mtrec/dataset.hpp"

namespace user509 {

inline const std::string kOriginal =
    "Given a user, as a recommender system, provide recommendations. The user 509 likes the "
    "following items: Dukes of Hazzard, The (2005) 2/5, Miss Congeniality (2000) 3/5, Click "
    "(2006) 1/5, Ultraviolet (2006) 2/5, Monty Python and the Holy Grail (1975) 4/5. (1 being "
    "lowest and 5 being highest ). Give me back 5 recommendations";

inline const std::string kMr1 =
    "Given a user, as a recommender system, provide recommendations. The user 509 likes the "
    "following items: Dukes of Hazzard, The (2005) 4/10, Miss Congeniality (2000) 6/10, Click "
    "(2006) 2/10, Ultraviolet (2006) 4/10, Monty Python and the Holy Grail (1975) 8/10. (1 being "
    "lowest and 10 being highest ). Give me back 5 recommendations";

inline const std::string kMr2 =
    "Given a user, as a recommender system, provide recommendations. The user 509 likes the "
    "following items: Dukes of Hazzard, The (2005) 3/6, Miss Congeniality (2000) 4/6, Click "
    "(2006) 2/6, Ultraviolet (2006) 3/6, Monty Python and the Holy Grail (1975) 5/6. (2 being "
    "lowest and 6 being highest ). Give me back 5 recommendations";

inline const std::string kMr3 =
    "Gi ven a u ser , as a re co m mende r syst em, prov ide r e commend ati ons. T he use r 509 "
    "l ik e s t he follow i n g item s : Dukes of Ha zza rd, T h e (2005 ) 2/5, M i ss Cong e n "
    "ialit y ( 2 0 00) 3/ 5, Cli ck (2 006) 1/5 , Ul t r aviolet ( 20 06) 2 /5 , Monty P y th o "
    "n and th e Ho ly Grail (1 975) 4/ 5. ( 1 be ing lowest and 5 be i ng hi ghes t ). Giv e me "
    "back 5 recommen d a ti o ns.";

inline const std::string kMr4 =
    "Given a user, as a banana recommender system, grape provide recommendations. The user pear "
    "509 likes banana the following items: grape Dukes of banana Hazzard, The (2005) 2/5, Miss "
    "Congeniality (2000) pear 3/5, Click (2006) 1/5, Ultraviolet (2006) 2/5, Monty Python and "
    "the Holy Grail (1975) 4/5. (1 being lowest and 5 being grape highest ). Give me back 5 "
    "banana recommendations, banana one movie per line and don't give any explanation";

inline mtrec::UserHistory history() {
  const mtrec::RatingScale s{1, 5};
  return mtrec::UserHistory{509,
                            {{"Dukes of Hazzard, The (2005)", 2, s},
                             {"Miss Congeniality (2000)", 3, s},
                             {"Click (2006)", 1, s},
                             {"Ultraviolet (2006)", 2, s},
                             {"Monty Python and the Holy Grail (1975)", 4, s}}};
}

}  // namespace user509
