#pragma once

#include <vector>

#include "tvl/errors.hpp"

namespace tvl {

namespace detail {

template <class F>
void fill_square(int n, int cell, std::vector<int>& grid, std::vector<unsigned>& row_used,
                 std::vector<unsigned>& col_used, F& fn) {
    if (cell == n * n) {
        std::vector<std::vector<int>> rows(n, std::vector<int>(n));
        for (int i = 0; i < n * n; ++i) rows[i / n][i % n] = grid[i];
        fn(LatinArray(std::move(rows)));
        return;
    }
    int r = cell / n, c = cell % n;
    unsigned free = ~(row_used[r] | col_used[c]) & ((1u << n) - 1);
    while (free) {
        int s = __builtin_ctz(free);
        free &= free - 1;
        grid[cell] = s;
        row_used[r] |= 1u << s;
        col_used[c] |= 1u << s;
        fill_square(n, cell + 1, grid, row_used, col_used, fn);
        row_used[r] &= ~(1u << s);
        col_used[c] &= ~(1u << s);
    }
}

}  // namespace detail

template <class F>
void for_each_latin_square(int n, F&& fn) {
    require(n >= 1 && n <= 6, "for_each_latin_square: order must be in [1, 6]");
    std::vector<int> grid(n * n, 0);
    std::vector<unsigned> row_used(n, 0), col_used(n, 0);
    detail::fill_square(n, 0, grid, row_used, col_used, fn);
}

}  // namespace tvl
