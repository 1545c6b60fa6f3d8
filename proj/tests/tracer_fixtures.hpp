#pragma once

// Hand-derived tracer fixtures shared by the unit tests and the acceptance run.
//
// Program (6 goals, depths by the 0-1 rule):
//   g0 entry d0; g1 then(x>0) d1; g2 then(x>5) d2; g3 else(x>5) d2;
//   g4 else(x>0) d1; g5 loop body d2 (reached through the outer join at d1).
//
// Impact scenario, tests recorded in order:
//   id1 x=7 -> {0,1,2}   id2 x=9 -> {0,1,2}   id3 x=3 -> {0,1,3}   id4 x=0 -> {0,4}
//   covering: g0 {1,2,3,4} g1 {1,2,3} g2 {1,2} g3 {3} g4 {4} g5 {}
//   impact:   id1 (0,2)  id2 (0,2)  id3 (1,2)  id4 (1,1)
//   deltas:   {0,1,2}    {}         {3}        {4}
//   select_seeds(all, 3) -> id3, id4, id1
//
// Seed-store sequence, capacity 2 (record then maybe_promote unless noted):
//   e1 id1 x=7  -> admit                  store [1]      gen 1
//   e2 id2 x=9  -> admit (room)           store [1,2]    gen 2   (id1 drops to (0,2))
//   e3 id3 x=3  -> (1,2) beats min id2    store [3,1]    gen 3
//   e4 promote id2 again -> (0,2) not above min (0,2): rejected, gen 3
//   e5 id4 x=0  -> (1,1) beats id1 (0,2)  store [3,4]    gen 4
//   e6 id5 x=-3 -> {0,4,5}: id4 falls to (0,1), id5 (1,2) evicts it
//                                         store [3,5]    gen 5
//
// Incomplete seed on diamond.mc (g0 entry, g1/g2 arms of a<b at d1, g3/g4
// arms of a+b==3 at d2), tests id1 (0,1) -> {0,1,4}, id2 (5,0) -> {0,2,4},
// target g3: on-path covered goals are g0,g1,g2; g4 is deeper but off-path;
// deepest on-path are g1,g2 at d1, lower id g1 wins -> seed id1.

#include <string>

inline const std::string kTracerFixtureProgram = R"(int main() {
  int x = input();
  if (x > 0) {
    if (x > 5) {
      x = 1;
    }
  }
  while (x < 0) {
    x = x + 1;
  }
  return x;
}
)";
