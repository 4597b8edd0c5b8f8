class Screen {
    void refresh(int d) {
    }
}

class Dashboard {
    private Screen mScreen;
    private int mDelayMs;
    private String mTitle;

    void retitle(String next) {
        mTitle = next;
    }

    public void redraw() {
        // <start>
        screen.refresh(delay);
        // <end>
    }
}
