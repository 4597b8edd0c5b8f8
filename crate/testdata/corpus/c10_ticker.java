class Ticker {
    private int numB;
    private int numA;

    public void tick() {
        numA = 5;
        // <start>
        track(num);
        // <end>
    }
}
