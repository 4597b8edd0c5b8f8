class Scanner {
    private int cursorPos;

    public void scan(int limit) {
        int idx = 0;
        for (int i = idx; i < limit; i = i + 1) {
            idx = idx + 1;
        }
        // <start>
        use(cursor);
        // <end>
    }
}
