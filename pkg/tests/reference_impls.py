"""Deliberately naive reference implementations of every analysis.

Plain-Python scan-everything versions, kept structurally independent of the
vectorized streaming code so the two can be compared for exact equality.
"""


def naive_interarrival_histogram(events, bin_width_ps, max_time_ps):
    events = [int(e) for e in events]
    n_bins = (max_time_ps + bin_width_ps - 1) // bin_width_ps
    counts = [0] * n_bins
    total = 0
    for i in range(1, len(events)):
        gap = events[i] - events[i - 1]
        total += 1
        if gap < max_time_ps:
            counts[gap // bin_width_ps] += 1
    return counts, total


def naive_afterpulse_probability(events, window_ps=1_000_000):
    events = [int(e) for e in events]
    if not events:
        return None
    close = 0
    for i, t in enumerate(events):
        if i > 0 and t - events[i - 1] < window_ps:
            close += 1
    return close / len(events)


def naive_corrected_dcr(events, duration_ps, window_ps=1_000_000):
    events = [int(e) for e in events]
    duration_s = duration_ps * 1e-12
    total = len(events) / duration_s
    if len(events) < 2:
        return total, total
    close = 0
    for i, t in enumerate(events):
        if i > 0 and t - events[i - 1] < window_ps:
            close += 1
    return total, total * (1.0 - close / len(events))


def naive_classify_trains(events, gap_ps=1_000_000):
    events = [int(e) for e in events]
    counts = {n: 0 for n in range(1, 7)}
    i = 0
    while i < len(events):
        j = i
        while j + 1 < len(events) and events[j + 1] - events[j] < gap_ps:
            j += 1
        counts[min(j - i + 1, 6)] += 1
        i = j + 1
    return counts


def naive_conditional_histogram(detector, sync, duration_ps, window_ps, bin_ps):
    detector = [int(e) for e in detector]
    n_bins = (window_ps + bin_ps - 1) // bin_ps
    counts = [0] * n_bins
    total = 0
    start = 0
    for s in sync:
        s = int(s)
        if s + window_ps > duration_ps:
            continue
        while start < len(detector) and detector[start] < s:
            start += 1
        in_window = []
        k = start
        while k < len(detector) and detector[k] < s + window_ps:
            in_window.append(detector[k] - s)
            k += 1
        if not any(dt < bin_ps for dt in in_window):
            continue
        for dt in in_window:
            counts[dt // bin_ps] += 1
            total += 1
    return counts, total
