/**
 * Guard against out-of-order async responses: each new request takes a
 * fresh token, and only the holder of the latest token may commit its
 * result to the view.
 */

export class RequestGate {
    private current = 0;

    /** Start a new request; invalidates every earlier token. */
    begin(): number {
        this.current += 1;
        return this.current;
    }

    /** True when the token still belongs to the most recent request. */
    isCurrent(token: number): boolean {
        return token === this.current;
    }
}

/**
 * Wrap an async loader so stale completions resolve to null instead of
 * clobbering newer state.
 */
export function latestOnly<A extends unknown[], R>(
    loader: (...args: A) => Promise<R>,
): (...args: A) => Promise<R | null> {
    const gate = new RequestGate();
    return async (...args: A) => {
        const token = gate.begin();
        const result = await loader(...args);
        return gate.isCurrent(token) ? result : null;
    };
}
